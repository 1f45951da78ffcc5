#include "normy/reader.hpp"

#include <algorithm>
#include <stdexcept>

#include "normy/text.hpp"

namespace normy::reader {

namespace {

void min_max(std::vector<double>& v) {
    if (v.empty()) return;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double a = *lo;
    const double span = *hi - *lo;
    for (double& x : v) x = span > 0.0 ? (x - a) / span : 0.0;
}

}  // namespace

void ReaderConfig::validate() const {
    if (max_span_len < 1) throw std::invalid_argument("max_span_len must be >= 1");
}

SpanChoice best_span_indices(std::span<const double> start, std::span<const double> end, std::size_t max_span_len) {
    if (start.empty() || start.size() != end.size()) {
        throw std::invalid_argument("best_span: start/end must be non-empty and equal length");
    }
    if (max_span_len < 1) throw std::invalid_argument("max_span_len must be >= 1");
    const std::size_t len = start.size();
    SpanChoice best{0, 0, start[0] + end[0]};
    for (std::size_t ms = 0; ms < len; ++ms) {
        const std::size_t last = std::min(len - 1, ms + max_span_len - 1);
        for (std::size_t me = ms; me <= last; ++me) {
            const double s = start[ms] + end[me];
            if (s > best.score) best = {ms, me, s};
        }
    }
    return best;
}

AnswerSpan best_span(std::string_view question, const Passage& passage, const ReaderConfig& config,
                     const encoders::SpanScorer& scorer) {
    config.validate();
    if (passage.tokens.empty()) throw std::invalid_argument("best_span: passage has no tokens");
    const auto scores = scorer.span_scores(question, passage);
    if (scores.start.size() != passage.tokens.size() || scores.end.size() != passage.tokens.size()) {
        throw std::runtime_error("span scorer returned " + std::to_string(scores.start.size()) +
                                 " scores for " + std::to_string(passage.tokens.size()) + " tokens");
    }
    const auto choice = best_span_indices(scores.start, scores.end, config.max_span_len);
    AnswerSpan span;
    span.passage_id = passage.id;
    span.start = choice.start;
    span.end = choice.end;
    span.text = text::join(std::vector<std::string>(passage.tokens.begin() + static_cast<std::ptrdiff_t>(choice.start),
                                                    passage.tokens.begin() + static_cast<std::ptrdiff_t>(choice.end) + 1));
    span.s_rd = choice.score;
    return span;
}

AnswerSpan answer_with_question(std::string_view question, std::span<const retriever::ScoredPassage> candidates,
                                const ReaderConfig& config, const encoders::SpanScorer& scorer) {
    if (candidates.empty()) throw std::invalid_argument("answer: no candidate passages");
    std::vector<AnswerSpan> spans;
    spans.reserve(candidates.size());
    for (const auto& c : candidates) {
        auto span = best_span(question, *c.passage, config, scorer);
        span.s_rt = c.s_rt;
        span.s_rr = c.s_rr.value_or(0.0);
        spans.push_back(std::move(span));
    }
    std::vector<double> rt, rr, rd;
    for (const auto& s : spans) {
        rt.push_back(s.s_rt);
        rr.push_back(s.s_rr);
        rd.push_back(s.s_rd);
    }
    if (config.normalize_scores) {
        min_max(rt);
        min_max(rr);
        min_max(rd);
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        spans[i].combined = rt[i] + rr[i] + rd[i];
        if (spans[i].combined > spans[best].combined) best = i;
    }
    return spans[best];
}

AnswerSpan answer(std::span<const std::string> questions, std::size_t n,
                  std::span<const retriever::ScoredPassage> reranked, const ReaderConfig& config,
                  const encoders::SpanScorer& scorer, const history::QuestionRewriter& rewriter) {
    return answer_with_question(rewriter.rewrite(questions, n), reranked, config, scorer);
}

}  // namespace normy::reader
