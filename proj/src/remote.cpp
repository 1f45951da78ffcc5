#include "normy/remote.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "httplib.h"
#include "normy/text.hpp"

namespace normy::encoders {

namespace {

std::vector<double> finite_array(const nlohmann::json& j, const std::string& endpoint, const char* what) {
    if (!j.is_array()) throw RemoteError(endpoint, std::string(what) + " is not an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw RemoteError(endpoint, std::string(what) + " holds a non-number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw RemoteError(endpoint, std::string(what) + " holds a non-finite value");
        out.push_back(d);
    }
    return out;
}

const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& endpoint) {
    if (!j.is_object() || !j.contains(key)) {
        throw RemoteError(endpoint, std::string("response lacks \"") + key + "\"");
    }
    return j.at(key);
}

// Lowercased word characters of a server token, markers removed.
std::string normalize_subword(std::string_view tok) {
    if (tok.starts_with("##")) tok.remove_prefix(2);
    for (std::string_view marker : {"\xC4\xA0", "\xE2\x96\x81"}) {  // Ġ, ▁
        if (tok.starts_with(marker)) tok.remove_prefix(marker.size());
    }
    std::string out;
    for (const auto& w : text::split_words(tok)) out += w.norm;
    return out;
}

}  // namespace

RemoteClient::RemoteClient(std::string endpoint, std::chrono::milliseconds timeout, std::size_t request_budget)
    : endpoint_(std::move(endpoint)), timeout_(timeout), budget_(request_budget) {
    while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
    if (endpoint_.empty()) throw std::invalid_argument("remote client requires an endpoint");
}

void RemoteClient::charge() const {
    const auto n = used_.fetch_add(1) + 1;
    if (budget_ != 0 && n > budget_) {
        throw RemoteError(endpoint_, "request budget of " + std::to_string(budget_) + " exhausted");
    }
}

std::string RemoteClient::post_raw(const std::string& path, const std::string& body) const {
    charge();
    httplib::Client cli(endpoint_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    auto res = cli.Post(path, body, "application/json");
    if (!res) throw RemoteError(endpoint_ + path, "transport error: " + httplib::to_string(res.error()));
    if (res->status != 200) {
        std::string cause = "HTTP " + std::to_string(res->status);
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_object() && parsed.contains("error") && parsed["error"].is_string()) {
            cause += ": " + parsed["error"].get<std::string>();
        }
        throw RemoteError(endpoint_ + path, cause);
    }
    return res->body;
}

std::string RemoteClient::get_raw(const std::string& path) const {
    charge();
    httplib::Client cli(endpoint_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    cli.set_connection_timeout(secs.count(), 0);
    cli.set_read_timeout(secs.count(), 0);
    auto res = cli.Get(path);
    if (!res) throw RemoteError(endpoint_ + path, "transport error: " + httplib::to_string(res.error()));
    if (res->status != 200) throw RemoteError(endpoint_ + path, "HTTP " + std::to_string(res->status));
    return res->body;
}

nlohmann::json RemoteClient::post(const std::string& path, const nlohmann::json& body) const {
    const auto raw = post_raw(path, body.dump());
    auto parsed = nlohmann::json::parse(raw, nullptr, false);
    if (parsed.is_discarded()) throw RemoteError(endpoint_ + path, "response is not valid JSON");
    return parsed;
}

Embedding RemoteEmbedder::embed(std::string_view text) const {
    const std::string t(text);
    return embed_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<Embedding> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
    const std::string where = client_->endpoint() + "/embed";
    const auto res = client_->post("/embed", {{"texts", std::vector<std::string>(texts.begin(), texts.end())}});
    const auto& vectors = field(res, "vectors", where);
    if (!vectors.is_array() || vectors.size() != texts.size()) {
        throw RemoteError(where, "expected " + std::to_string(texts.size()) + " vectors");
    }
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& v : vectors) {
        auto values = finite_array(v, where, "vector");
        if (values.size() != kEmbeddingDim) {
            throw RemoteError(where, "dimension " + std::to_string(values.size()) + " != " +
                                         std::to_string(kEmbeddingDim));
        }
        out.push_back(Embedding::from_values(std::move(values)));
    }
    return out;
}

double RemoteRelevanceScorer::score(const RelevanceInput& input) const {
    const Passage* p = &input.passage;
    return score_batch(input.window_turns, input.question, std::span<const Passage* const>(&p, 1)).front();
}

std::vector<double> RemoteRelevanceScorer::score_batch(const std::vector<std::string>& window,
                                                       const std::string& question,
                                                       std::span<const Passage* const> passages) const {
    const std::string where = client_->endpoint() + "/rerank";
    nlohmann::json items = nlohmann::json::array();
    for (const Passage* p : passages) items.push_back({{"id", p->id}, {"text", p->text}});
    const auto res = client_->post("/rerank", {{"window", window}, {"question", question}, {"passages", items}});
    auto scores = finite_array(field(res, "scores", where), where, "scores");
    if (scores.size() != passages.size()) {
        throw RemoteError(where, "expected " + std::to_string(passages.size()) + " scores, got " +
                                     std::to_string(scores.size()));
    }
    for (double s : scores) {
        if (s < 0.0 || s > 1.0) throw RemoteError(where, "score " + std::to_string(s) + " outside [0, 1]");
    }
    return scores;
}

SpanScores RemoteSpanScorer::span_scores(std::string_view question, const Passage& passage) const {
    const std::string where = client_->endpoint() + "/read";
    const auto res = client_->post("/read", {{"question", std::string(question)}, {"passage", passage.text}});
    auto start = finite_array(field(res, "start", where), where, "start");
    auto end = finite_array(field(res, "end", where), where, "end");
    const auto& tokens_json = field(res, "tokens", where);
    if (!tokens_json.is_array()) throw RemoteError(where, "tokens is not an array");
    std::vector<std::string> tokens;
    for (const auto& t : tokens_json) {
        if (!t.is_string()) throw RemoteError(where, "tokens holds a non-string");
        tokens.push_back(t.get<std::string>());
    }
    if (start.size() != tokens.size() || end.size() != tokens.size()) {
        throw RemoteError(where, "start/end/tokens length mismatch");
    }
    return align_span_logits(passage.tokens, tokens, start, end);
}

SpanScores align_span_logits(const std::vector<std::string>& passage_tokens,
                             const std::vector<std::string>& server_tokens, const std::vector<double>& start,
                             const std::vector<double>& end) {
    std::string chars;
    std::vector<std::size_t> owner;
    for (std::size_t m = 0; m < passage_tokens.size(); ++m) {
        chars += passage_tokens[m];
        owner.insert(owner.end(), passage_tokens[m].size(), m);
    }
    constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
    SpanScores out{std::vector<double>(passage_tokens.size(), kUnset),
                   std::vector<double>(passage_tokens.size(), kUnset)};
    double min_start = std::numeric_limits<double>::infinity();
    double min_end = std::numeric_limits<double>::infinity();
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < server_tokens.size(); ++j) {
        min_start = std::min(min_start, start[j]);
        min_end = std::min(min_end, end[j]);
        const auto piece = normalize_subword(server_tokens[j]);
        if (piece.empty() || chars.compare(cursor, piece.size(), piece) != 0) continue;
        const auto first = owner[cursor];
        const auto last = owner[cursor + piece.size() - 1];
        if (std::isnan(out.start[first])) out.start[first] = start[j];
        out.end[last] = end[j];
        cursor += piece.size();
    }
    if (server_tokens.empty()) min_start = min_end = 0.0;
    for (auto& v : out.start) {
        if (std::isnan(v)) v = min_start;
    }
    for (auto& v : out.end) {
        if (std::isnan(v)) v = min_end;
    }
    return out;
}

}  // namespace normy::encoders
