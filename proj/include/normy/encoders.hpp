#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "normy/corpus_index.hpp"

namespace normy::encoders {

inline constexpr std::size_t kEmbeddingDim = 768;

/// Dense sentence vector. A zero vector (norm 0) is degenerate: every
/// similarity against it is 0.
struct Embedding {
    std::vector<double> values;
    double norm = 0.0;

    static Embedding from_values(std::vector<double> values);
    bool degenerate() const { return norm == 0.0; }
    std::size_t dim() const { return values.size(); }
};

struct Similarity {
    double value = 0.0;
    bool degenerate = false;
};

/// Throws std::invalid_argument on a dimension mismatch.
Similarity cosine(const Embedding& a, const Embedding& b);
inline double cosine_sim(const Embedding& a, const Embedding& b) { return cosine(a, b).value; }

std::uint64_t fnv1a64(std::string_view bytes);

/// Thrown for transport failures and wire-contract violations from a remote
/// scorer. what() carries the endpoint and the cause.
class RemoteError : public std::runtime_error {
public:
    RemoteError(const std::string& endpoint, const std::string& cause)
        : std::runtime_error("remote scorer " + endpoint + ": " + cause), endpoint_(endpoint) {}
    const std::string& endpoint() const noexcept { return endpoint_; }

private:
    std::string endpoint_;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Embedding embed(std::string_view text) const = 0;
    virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts) const;
};

/// Input of one relevance judgment: the last w turns (oldest first), the
/// final question, and the candidate passage.
struct RelevanceInput {
    std::vector<std::string> window_turns;
    std::string question;
    const Passage& passage;
};

class RelevanceScorer {
public:
    virtual ~RelevanceScorer() = default;
    /// Probability-like relevance in [0, 1].
    virtual double score(const RelevanceInput& input) const = 0;
    virtual std::vector<double> score_batch(const std::vector<std::string>& window, const std::string& question,
                                            std::span<const Passage* const> passages) const;
};

/// Per-token start/end scores over a passage's full token stream.
struct SpanScores {
    std::vector<double> start;
    std::vector<double> end;
};

class SpanScorer {
public:
    virtual ~SpanScorer() = default;
    virtual SpanScores span_scores(std::string_view question, const Passage& passage) const = 0;
};

/// Hashed bag of words: each distinct full-stream token goes to bucket
/// fnv1a64(token) % 768 with weight 1 + ln(tf); the vector is L2-normalized.
class BuiltinEmbedder final : public Embedder {
public:
    Embedding embed(std::string_view text) const override;
};

/// Jaccard overlap of content-term sets (window + question vs passage).
class BuiltinRelevanceScorer final : public RelevanceScorer {
public:
    double score(const RelevanceInput& input) const override;
};

/// Windowed overlap with the question's content terms: S_s[m] covers tokens
/// [m, m + window), S_e[m] covers [max(0, m - window), m + 1).
class BuiltinSpanScorer final : public SpanScorer {
public:
    explicit BuiltinSpanScorer(std::size_t window = 20) : window_(window) {}
    SpanScores span_scores(std::string_view question, const Passage& passage) const override;

private:
    std::size_t window_;
};

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

enum class ScorerKind { Builtin, Remote };

/// Selects the implementation behind the three scoring interfaces. The
/// model weights live wherever the handle points; the primary side never
/// materializes them.
struct NeuralScorerHandle {
    ScorerKind kind = ScorerKind::Builtin;
    std::string endpoint;  // remote only, e.g. "http://127.0.0.1:8080"
    std::chrono::milliseconds timeout{30000};
    std::size_t request_budget = 0;  // 0 = unlimited
    std::string embed_model;
    std::string rerank_model;
    std::string read_model;

    /// Throws std::invalid_argument for a remote handle without endpoint.
    void validate() const;
};

struct Scorers {
    std::shared_ptr<const Embedder> embedder;
    std::shared_ptr<const RelevanceScorer> relevance;
    std::shared_ptr<const SpanScorer> span;
};

Scorers make_scorers(const NeuralScorerHandle& handle);
Scorers builtin_scorers();

}  // namespace normy::encoders
