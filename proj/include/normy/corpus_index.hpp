#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace normy {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    /// Throws std::invalid_argument unless k1 > 0 and 0 <= b <= 1.
    void validate() const;
};

/// One retrievable unit of the collection. `tokens` is the full token stream
/// of `text` (stopwords kept) and is never empty for an indexed passage.
struct Passage {
    std::string id;
    std::string title;
    std::string text;
    std::vector<std::string> tokens;

    static Passage make(std::string id, std::string title, std::string text);
    std::size_t length() const { return tokens.size(); }
};

class DuplicateIdError : public std::runtime_error {
public:
    explicit DuplicateIdError(std::string id)
        : std::runtime_error("DuplicateId(\"" + id + "\")"), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class UnknownPassageError : public std::runtime_error {
public:
    explicit UnknownPassageError(const std::string& id)
        : std::runtime_error("unknown passage id \"" + id + "\"") {}
};

class IndexFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Posting {
    std::uint32_t doc;  // ordinal; ordinals follow ascending passage id
    std::uint32_t tf;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct Hit {
    std::uint32_t doc;
    double score;
};

/// Immutable BM25 index. Passages are stored in ascending id order, so doc
/// ordinals compare the same way their ids do. Safe for concurrent reads.
class InvertedIndex {
public:
    /// Throws DuplicateIdError on a repeated id, std::invalid_argument on an
    /// empty passage or bad params.
    static InvertedIndex build(std::vector<Passage> passages, Bm25Params params = {});

    /// Query terms are a multiset: each occurrence contributes once.
    double bm25_score(std::span<const std::string> query, std::string_view pid) const;
    double bm25_score(std::span<const std::string> query, std::uint32_t doc) const;

    /// Top-k passages with score > 0, score descending, ties by ascending id.
    std::vector<Hit> retrieve_topk(std::span<const std::string> query, std::size_t k) const;

    std::size_t size() const { return passages_.size(); }
    double avgdl() const { return avgdl_; }
    const Bm25Params& params() const { return params_; }
    const Passage& passage(std::uint32_t doc) const { return passages_.at(doc); }
    const std::vector<Passage>& passages() const { return passages_; }
    std::optional<std::uint32_t> find(std::string_view pid) const;
    std::uint32_t doc_length(std::uint32_t doc) const { return doc_lengths_.at(doc); }

    std::size_t term_count() const { return terms_.size(); }
    std::size_t df(std::string_view term) const;
    double idf(std::string_view term) const;
    std::span<const Posting> postings(std::string_view term) const;
    const std::vector<std::string>& terms() const { return terms_; }

    void save(std::ostream& out) const;
    static InvertedIndex load(std::istream& in);
    void save_file(const std::string& path) const;
    static InvertedIndex load_file(const std::string& path);

private:
    struct QueryTerm {
        std::uint32_t term_id;
        std::uint32_t count;
    };

    InvertedIndex() = default;
    void finalize();
    std::vector<QueryTerm> resolve(std::span<const std::string> query) const;
    double term_weight(std::uint32_t term_id, std::uint32_t doc, std::uint32_t tf) const;

    Bm25Params params_;
    std::vector<Passage> passages_;
    std::vector<std::uint32_t> doc_lengths_;  // index-stream lengths
    std::unordered_map<std::string, std::uint32_t> pid_to_doc_;
    double avgdl_ = 0.0;

    std::vector<std::string> terms_;  // sorted; position is the term id
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;

    std::vector<double> idf_;
    std::vector<double> length_norm_;  // k1 * (1 - b + b * len / avgdl)
};

}  // namespace normy
