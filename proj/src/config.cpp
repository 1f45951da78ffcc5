#include "normy/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace normy::config {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::size_t parse_size(std::string_view key, std::string_view v) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw std::invalid_argument(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

double parse_double(std::string_view key, std::string_view v) {
    double out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw std::invalid_argument(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

std::string fmt(double v) {
    std::ostringstream o;
    o << v;
    return o.str();
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
    std::string key;
    std::function<void(AppConfig&, std::string_view)> set;
    std::function<std::string(const AppConfig&)> get;
};

#define SIZE_FIELD(name, member)                                                          \
    Field {                                                                               \
        name, [](AppConfig& c, std::string_view v) { c.member = parse_size(name, v); },   \
            [](const AppConfig& c) { return std::to_string(c.member); }                   \
    }
#define DOUBLE_FIELD(name, member)                                                        \
    Field {                                                                               \
        name, [](AppConfig& c, std::string_view v) { c.member = parse_double(name, v); }, \
            [](const AppConfig& c) { return fmt(c.member); }                              \
    }
#define BOOL_FIELD(name, member)                                                          \
    Field {                                                                               \
        name, [](AppConfig& c, std::string_view v) { c.member = parse_bool(name, v); },   \
            [](const AppConfig& c) { return fmt(c.member); }                              \
    }
#define STRING_FIELD(name, member)                                                        \
    Field {                                                                               \
        name, [](AppConfig& c, std::string_view v) { c.member = std::string(v); },       \
            [](const AppConfig& c) { return c.member; }                                   \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        DOUBLE_FIELD("bm25.k1", bm25.k1),
        DOUBLE_FIELD("bm25.b", bm25.b),
        SIZE_FIELD("retriever.k", retriever.k),
        DOUBLE_FIELD("retriever.lambda", retriever.lambda),
        BOOL_FIELD("retriever.use_decay", retriever.use_decay),
        BOOL_FIELD("retriever.use_sim", retriever.use_sim),
        SIZE_FIELD("rerank.w", rerank.w),
        SIZE_FIELD("reader.max_span_len", reader.max_span_len),
        BOOL_FIELD("reader.normalize_scores", reader.normalize_scores),
        SIZE_FIELD("strategy.w", strategy.w),
        SIZE_FIELD("strategy.y", strategy.y),
        DOUBLE_FIELD("strategy.backtrack_threshold", strategy.backtrack_threshold),
        Field{"scorer.endpoint",
              [](AppConfig& c, std::string_view v) {
                  if (v.empty() || v == "builtin") {
                      c.scorer.kind = encoders::ScorerKind::Builtin;
                      c.scorer.endpoint.clear();
                  } else {
                      c.scorer.kind = encoders::ScorerKind::Remote;
                      c.scorer.endpoint = std::string(v);
                  }
              },
              [](const AppConfig& c) {
                  return c.scorer.kind == encoders::ScorerKind::Builtin ? std::string("builtin") : c.scorer.endpoint;
              }},
        Field{"scorer.timeout_ms",
              [](AppConfig& c, std::string_view v) {
                  c.scorer.timeout = std::chrono::milliseconds(parse_size("scorer.timeout_ms", v));
              },
              [](const AppConfig& c) { return std::to_string(c.scorer.timeout.count()); }},
        SIZE_FIELD("scorer.request_budget", scorer.request_budget),
        STRING_FIELD("scorer.embed_model", scorer.embed_model),
        STRING_FIELD("scorer.rerank_model", scorer.rerank_model),
        STRING_FIELD("scorer.read_model", scorer.read_model),
        SIZE_FIELD("eval.jobs", jobs),
    };
    return table;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD
#undef STRING_FIELD

const Field& field(std::string_view key) {
    for (const auto& f : fields()) {
        if (f.key == key) return f;
    }
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void AppConfig::set(std::string_view key, std::string_view value) { field(key).set(*this, trim(value)); }

std::string AppConfig::get(std::string_view key) const { return field(key).get(*this); }

void AppConfig::apply(std::istream& in, std::string_view source) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        try {
            if (eq == std::string_view::npos) throw std::invalid_argument("expected key = value");
            set(trim(s.substr(0, eq)), s.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void AppConfig::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    apply(in, path);
}

void AppConfig::validate() const {
    bm25.validate();
    retriever.validate();
    rerank.validate();
    reader.validate();
    strategy.validate();
    scorer.validate();
    if (jobs < 1) throw std::invalid_argument("eval.jobs must be >= 1");
}

std::string AppConfig::to_text() const {
    std::string out;
    for (const auto& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
    return out;
}

const std::vector<std::string>& AppConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& f : fields()) v.push_back(f.key);
        return v;
    }();
    return names;
}

}  // namespace normy::config
