#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace normy::metrics {

struct ModuleResult {
    std::string conv_id;
    std::string qid;
    std::vector<std::string> ranked_passage_ids;
    std::optional<std::string> predicted_answer;
};

using GoldPassages = std::map<std::string, std::string>;  // qid -> passage id

/// Mean reciprocal rank of the gold passage (0 when absent). Throws
/// std::invalid_argument naming the qid when a result has no gold entry.
/// An empty result list scores 0.
double mrr(std::span<const ModuleResult> results, const GoldPassages& gold);

/// Fraction of results whose gold passage is among the first k ids.
double recall_at_k(std::span<const ModuleResult> results, const GoldPassages& gold, std::size_t k);

/// Lowercase, strip punctuation, drop the articles a/an/the, collapse
/// whitespace; returns the resulting tokens.
std::vector<std::string> normalize_answer(std::string_view s);

/// Token-multiset F1 after normalize_answer(). Both empty -> 1, one empty -> 0.
double token_f1(std::string_view predicted, std::string_view gold);

}  // namespace normy::metrics
