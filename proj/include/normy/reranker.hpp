#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "normy/encoders.hpp"
#include "normy/retriever.hpp"

namespace normy::reranker {

struct RerankConfig {
    std::size_t w = 6;

    void validate() const;
};

/// q_{max(0, n-w)} .. q_{n-1}
std::vector<std::string> window_turns(std::span<const std::string> questions, std::size_t n, std::size_t w);

/// Scores every passage against (window, question) and orders by s_rr
/// descending, then s_rt descending, then passage id. A permutation of the
/// input; scorer errors propagate and abort the whole call.
std::vector<retriever::ScoredPassage> rerank_with(const std::vector<std::string>& window, const std::string& question,
                                                  std::vector<retriever::ScoredPassage> passages,
                                                  const encoders::RelevanceScorer& scorer);

std::vector<retriever::ScoredPassage> rerank(std::span<const std::string> questions, std::size_t n,
                                             std::vector<retriever::ScoredPassage> passages,
                                             const RerankConfig& config, const encoders::RelevanceScorer& scorer);

}  // namespace normy::reranker
