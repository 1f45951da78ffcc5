#include "normy/corpus_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "normy/text.hpp"

namespace normy {

namespace {

constexpr char kMagic[8] = {'N', 'R', 'M', 'Y', 'I', 'D', 'X', '\0'};
constexpr int kFormatVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_str(std::ostream& out, std::string_view s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw IndexFormatError("truncated index file");
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

std::string get_str(std::istream& in) {
    const auto n = get_u32(in);
    std::string s(n, '\0');
    if (n && !in.read(s.data(), n)) throw IndexFormatError("truncated index file");
    return s;
}

}  // namespace

void Bm25Params::validate() const {
    if (!(k1 > 0.0) || !std::isfinite(k1)) throw std::invalid_argument("bm25 k1 must be > 0");
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("bm25 b must be in [0, 1]");
}

Passage Passage::make(std::string id, std::string title, std::string text) {
    Passage p{std::move(id), std::move(title), std::move(text), {}};
    p.tokens = text::tokenize(p.text);
    return p;
}

InvertedIndex InvertedIndex::build(std::vector<Passage> passages, Bm25Params params) {
    params.validate();
    {
        std::unordered_set<std::string_view> seen;
        for (const auto& p : passages) {
            if (!seen.insert(p.id).second) throw DuplicateIdError(p.id);
        }
    }
    std::sort(passages.begin(), passages.end(),
              [](const Passage& a, const Passage& b) { return a.id < b.id; });

    InvertedIndex index;
    index.params_ = params;
    index.passages_ = std::move(passages);
    index.doc_lengths_.reserve(index.passages_.size());

    std::map<std::string, std::vector<Posting>, std::less<>> postings;
    for (std::uint32_t doc = 0; doc < index.passages_.size(); ++doc) {
        auto& p = index.passages_[doc];
        if (p.tokens.empty()) p.tokens = text::tokenize(p.text);
        if (p.tokens.empty()) {
            throw std::invalid_argument("passage \"" + p.id + "\" has no tokens");
        }
        std::map<std::string_view, std::uint32_t> tf;
        std::uint32_t len = 0;
        for (const auto& t : p.tokens) {
            if (text::is_stopword(t)) continue;
            ++tf[t];
            ++len;
        }
        index.doc_lengths_.push_back(len);
        for (const auto& [term, count] : tf) {
            auto it = postings.find(term);
            if (it == postings.end()) it = postings.emplace(std::string(term), std::vector<Posting>{}).first;
            it->second.push_back({doc, count});
        }
    }
    index.terms_.reserve(postings.size());
    index.postings_.reserve(postings.size());
    for (auto& [term, list] : postings) {
        index.terms_.push_back(term);
        index.postings_.push_back(std::move(list));
    }
    index.finalize();
    return index;
}

void InvertedIndex::finalize() {
    pid_to_doc_.clear();
    pid_to_doc_.reserve(passages_.size());
    for (std::uint32_t doc = 0; doc < passages_.size(); ++doc) pid_to_doc_.emplace(passages_[doc].id, doc);

    term_ids_.clear();
    term_ids_.reserve(terms_.size());
    for (std::uint32_t t = 0; t < terms_.size(); ++t) term_ids_.emplace(terms_[t], t);

    const double total = std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), 0.0);
    avgdl_ = passages_.empty() ? 0.0 : total / static_cast<double>(passages_.size());

    const double n = static_cast<double>(passages_.size());
    idf_.resize(terms_.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const double df = static_cast<double>(postings_[t].size());
        idf_[t] = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    }
    length_norm_.resize(passages_.size());
    for (std::size_t d = 0; d < passages_.size(); ++d) {
        // avgdl is 0 only when no passage has an index term, in which case no
        // posting exists and the norm is never read.
        const double rel = avgdl_ > 0.0 ? doc_lengths_[d] / avgdl_ : 1.0;
        length_norm_[d] = params_.k1 * (1.0 - params_.b + params_.b * rel);
    }
}

std::optional<std::uint32_t> InvertedIndex::find(std::string_view pid) const {
    auto it = pid_to_doc_.find(std::string(pid));
    if (it == pid_to_doc_.end()) return std::nullopt;
    return it->second;
}

std::size_t InvertedIndex::df(std::string_view term) const {
    return postings(term).size();
}

double InvertedIndex::idf(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return 0.0;
    return idf_[it->second];
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return {};
    return postings_[it->second];
}

std::vector<InvertedIndex::QueryTerm> InvertedIndex::resolve(std::span<const std::string> query) const {
    // Grouped by term id so every caller sums contributions in the same order.
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& t : query) {
        auto it = term_ids_.find(t);
        if (it != term_ids_.end()) ++counts[it->second];
    }
    std::vector<QueryTerm> out;
    out.reserve(counts.size());
    for (const auto& [id, c] : counts) out.push_back({id, c});
    return out;
}

double InvertedIndex::term_weight(std::uint32_t term_id, std::uint32_t doc, std::uint32_t tf) const {
    const double f = static_cast<double>(tf);
    return idf_[term_id] * (f * (params_.k1 + 1.0)) / (f + length_norm_[doc]);
}

double InvertedIndex::bm25_score(std::span<const std::string> query, std::string_view pid) const {
    const auto doc = find(pid);
    if (!doc) throw UnknownPassageError(std::string(pid));
    return bm25_score(query, *doc);
}

double InvertedIndex::bm25_score(std::span<const std::string> query, std::uint32_t doc) const {
    if (doc >= passages_.size()) throw UnknownPassageError("#" + std::to_string(doc));
    double score = 0.0;
    for (const auto& qt : resolve(query)) {
        const auto& list = postings_[qt.term_id];
        auto it = std::lower_bound(list.begin(), list.end(), doc,
                                   [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        if (it == list.end() || it->doc != doc) continue;
        score += qt.count * term_weight(qt.term_id, doc, it->tf);
    }
    return score;
}

std::vector<Hit> InvertedIndex::retrieve_topk(std::span<const std::string> query, std::size_t k) const {
    if (k == 0) throw std::invalid_argument("retrieve_topk: k must be >= 1");
    const auto terms = resolve(query);
    if (terms.empty()) return {};

    std::vector<double> acc(passages_.size(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& qt : terms) {
        for (const auto& p : postings_[qt.term_id]) {
            if (acc[p.doc] == 0.0) touched.push_back(p.doc);
            acc[p.doc] += qt.count * term_weight(qt.term_id, p.doc, p.tf);
        }
    }
    std::vector<Hit> hits;
    hits.reserve(touched.size());
    for (auto doc : touched) {
        if (acc[doc] > 0.0) hits.push_back({doc, acc[doc]});
    }
    auto better = [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc < b.doc;
    };
    if (hits.size() > k) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), better);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), better);
    }
    return hits;
}

void InvertedIndex::save(std::ostream& out) const {
    nlohmann::json header = {
        {"format", "normy-index"},
        {"version", kFormatVersion},
        {"k1", params_.k1},
        {"b", params_.b},
        {"N", passages_.size()},
        {"avgdl", avgdl_},
        {"terms", terms_.size()},
    };
    out.write(kMagic, sizeof kMagic);
    put_str(out, header.dump());
    for (std::size_t d = 0; d < passages_.size(); ++d) {
        const auto& p = passages_[d];
        put_str(out, p.id);
        put_str(out, p.title);
        put_str(out, p.text);
        put_u32(out, doc_lengths_[d]);
    }
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        put_str(out, terms_[t]);
        put_u32(out, static_cast<std::uint32_t>(postings_[t].size()));
        for (const auto& p : postings_[t]) {
            put_u32(out, p.doc);
            put_u32(out, p.tf);
        }
    }
    if (!out) throw IndexFormatError("failed writing index");
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic)) {
        throw IndexFormatError("not a normy index file");
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(get_str(in));
    } catch (const nlohmann::json::exception& e) {
        throw IndexFormatError(std::string("bad index header: ") + e.what());
    }
    if (header.value("format", "") != "normy-index" || header.value("version", 0) != kFormatVersion) {
        throw IndexFormatError("unsupported index format/version");
    }

    InvertedIndex index;
    index.params_ = {header.at("k1").get<double>(), header.at("b").get<double>()};
    index.params_.validate();
    const auto n = header.at("N").get<std::size_t>();
    const auto nterms = header.at("terms").get<std::size_t>();

    index.passages_.reserve(n);
    index.doc_lengths_.reserve(n);
    for (std::size_t d = 0; d < n; ++d) {
        auto id = get_str(in);
        auto title = get_str(in);
        auto body = get_str(in);
        index.passages_.push_back(Passage::make(std::move(id), std::move(title), std::move(body)));
        const auto len = get_u32(in);
        const auto expected = text::content_terms(index.passages_.back().tokens).size();
        if (len != expected) throw IndexFormatError("doc length mismatch for " + index.passages_.back().id);
        index.doc_lengths_.push_back(len);
        if (d > 0 && !(index.passages_[d - 1].id < index.passages_[d].id)) {
            throw IndexFormatError("passages out of id order");
        }
    }
    index.terms_.reserve(nterms);
    index.postings_.reserve(nterms);
    for (std::size_t t = 0; t < nterms; ++t) {
        index.terms_.push_back(get_str(in));
        const auto count = get_u32(in);
        std::vector<Posting> list;
        list.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            const auto doc = get_u32(in);
            const auto tf = get_u32(in);
            if (doc >= n || tf == 0 || tf > index.doc_lengths_[doc] || (!list.empty() && list.back().doc >= doc)) {
                throw IndexFormatError("corrupt posting list for term \"" + index.terms_.back() + "\"");
            }
            list.push_back({doc, tf});
        }
        index.postings_.push_back(std::move(list));
    }
    index.finalize();
    return index;
}

void InvertedIndex::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IndexFormatError("cannot open " + path + " for writing");
    save(out);
}

InvertedIndex InvertedIndex::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexFormatError("cannot open " + path);
    return load(in);
}

}  // namespace normy
