#include "normy/reranker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace normy::reranker {

void RerankConfig::validate() const {
    if (w < 1) throw std::invalid_argument("rerank window w must be >= 1");
}

std::vector<std::string> window_turns(std::span<const std::string> questions, std::size_t n, std::size_t w) {
    if (n >= questions.size()) throw std::out_of_range("window_turns: turn index out of range");
    const std::size_t lo = n > w ? n - w : 0;
    return {questions.begin() + static_cast<std::ptrdiff_t>(lo), questions.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<retriever::ScoredPassage> rerank_with(const std::vector<std::string>& window, const std::string& question,
                                                  std::vector<retriever::ScoredPassage> passages,
                                                  const encoders::RelevanceScorer& scorer) {
    if (passages.empty()) return passages;
    std::vector<const Passage*> refs;
    refs.reserve(passages.size());
    for (const auto& p : passages) refs.push_back(p.passage);
    const auto scores = scorer.score_batch(window, question, refs);
    if (scores.size() != passages.size()) throw std::runtime_error("relevance scorer returned wrong count");
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
            throw std::runtime_error("relevance score outside [0, 1] for " + passages[i].id());
        }
        passages[i].s_rr = scores[i];
    }
    std::stable_sort(passages.begin(), passages.end(),
                     [](const retriever::ScoredPassage& a, const retriever::ScoredPassage& b) {
                         if (*a.s_rr != *b.s_rr) return *a.s_rr > *b.s_rr;
                         if (a.s_rt != b.s_rt) return a.s_rt > b.s_rt;
                         return a.id() < b.id();
                     });
    return passages;
}

std::vector<retriever::ScoredPassage> rerank(std::span<const std::string> questions, std::size_t n,
                                             std::vector<retriever::ScoredPassage> passages,
                                             const RerankConfig& config, const encoders::RelevanceScorer& scorer) {
    config.validate();
    return rerank_with(window_turns(questions, n, config.w), questions[n], std::move(passages), scorer);
}

}  // namespace normy::reranker
