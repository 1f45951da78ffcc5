#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "normy/encoders.hpp"
#include "normy/history.hpp"
#include "normy/retriever.hpp"

namespace normy::reader {

struct ReaderConfig {
    std::size_t max_span_len = 30;
    /// Min-max normalize s_rt, s_rr and s_rd across candidates before summing.
    bool normalize_scores = false;

    void validate() const;
};

struct AnswerSpan {
    std::string passage_id;
    std::size_t start = 0;  // inclusive token index
    std::size_t end = 0;    // inclusive token index
    std::string text;
    double s_rt = 0.0;
    double s_rr = 0.0;
    double s_rd = 0.0;
    double combined = 0.0;
};

struct SpanChoice {
    std::size_t start = 0;
    std::size_t end = 0;
    double score = 0.0;
};

/// argmax of start[ms] + end[me] over ms <= me < ms + max_span_len; ties go
/// to the earlier start, then the shorter span. Requires non-empty input.
SpanChoice best_span_indices(std::span<const double> start, std::span<const double> end, std::size_t max_span_len);

/// Best span of one passage under `scorer`; s_rt/s_rr/combined are left 0.
AnswerSpan best_span(std::string_view question, const Passage& passage, const ReaderConfig& config,
                     const encoders::SpanScorer& scorer);

/// Best span across candidates by s_rt + s_rr + s_rd for a fixed question.
/// Ties keep the earlier candidate. Throws std::invalid_argument when empty.
AnswerSpan answer_with_question(std::string_view question, std::span<const retriever::ScoredPassage> candidates,
                                const ReaderConfig& config, const encoders::SpanScorer& scorer);

/// Rewrites q_n against the history, then answer_with_question().
AnswerSpan answer(std::span<const std::string> questions, std::size_t n,
                  std::span<const retriever::ScoredPassage> reranked, const ReaderConfig& config,
                  const encoders::SpanScorer& scorer, const history::QuestionRewriter& rewriter);

}  // namespace normy::reader
