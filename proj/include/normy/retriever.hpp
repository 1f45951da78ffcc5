#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "normy/corpus_index.hpp"
#include "normy/encoders.hpp"

namespace normy::retriever {

struct RetrieverConfig {
    std::size_t k = 10;
    std::size_t y = 5;
    double lambda = 0.1;
    bool use_decay = true;  // false reproduces the "w/o decay" ablation
    bool use_sim = true;    // false reproduces the "w/o sim" ablation

    void validate() const;
};

/// A retrieved passage with provenance. `passage` points into the index the
/// passage came from, which must outlive it.
struct ScoredPassage {
    const Passage* passage = nullptr;
    std::uint32_t doc = 0;
    double bm25 = 0.0;
    std::size_t origin_turn = 0;
    double sim_factor = 1.0;
    double s_rt = 0.0;
    std::optional<double> s_rr;

    const std::string& id() const { return passage->id; }
};

/// max(bm25 - lambda * age, 0) * mean(clamp(sims, 0, 1)). Empty `sims`
/// means no reference pool and a factor of 1. Throws std::invalid_argument
/// for lambda < 0.
double decay_score(double bm25, std::size_t age, double lambda, std::span<const double> sims);

/// Thread-safe memo of passage embeddings keyed by doc ordinal.
class EmbeddingCache {
public:
    explicit EmbeddingCache(const encoders::Embedder& embedder) : embedder_(embedder) {}
    const encoders::Embedding& get(const InvertedIndex& index, std::uint32_t doc);

private:
    const encoders::Embedder& embedder_;
    std::shared_mutex mu_;
    std::unordered_map<std::uint32_t, encoders::Embedding> cache_;
};

/// Plain BM25 top-k as ScoredPassages (s_rt = bm25, origin = turn).
std::vector<ScoredPassage> bm25_retrieve(const InvertedIndex& index, std::span<const std::string> query,
                                         std::size_t k, std::size_t turn = 0);

/// Per-turn keyphrase retrieval pooled across turns 0..n and re-scored with
/// history-aware decay; returns at most k passages by descending s_rt.
std::vector<ScoredPassage> normy_retrieve(const InvertedIndex& index, const encoders::Embedder& embedder,
                                          std::span<const std::string> questions, std::size_t n,
                                          const RetrieverConfig& config, EmbeddingCache* cache = nullptr);

}  // namespace normy::retriever
