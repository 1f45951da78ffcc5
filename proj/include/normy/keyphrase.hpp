#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace normy::keyphrase {

/// Per-word statistical features. Lower `score` means more important.
struct WordStats {
    std::string term;
    int tf = 0;
    double w_case = 0.0;
    double w_pos = 0.0;
    double w_freq = 0.0;
    double w_rel = 0.0;
    double w_difs = 0.0;
    double score = 0.0;
};

struct Keyphrase {
    std::vector<std::string> terms;  // 1..3 lowercased words
    std::string phrase;              // terms joined by a single space
    double score = 0.0;
    std::size_t first_occurrence = 0;  // word position of first occurrence
};

inline constexpr std::size_t kMaxNgram = 3;
inline constexpr double kDedupThreshold = 0.8;

/// S(b) = (W_Rel * W_Pos) / (W_Case + W_Freq / W_Rel + W_DifS / W_Rel)
double word_score(double w_case, double w_pos, double w_freq, double w_rel, double w_difs);

/// Features for every non-stopword term of `text`, keyed by lowercased term.
std::map<std::string, WordStats> word_features(std::string_view text);

/// Best `y` candidates, ascending score, near-duplicates removed.
std::vector<Keyphrase> extract_keyphrases(std::string_view text, std::size_t y);

/// The `y` distinct terms with the lowest word score S, ties by first
/// occurrence.
std::vector<std::string> top_keywords(std::string_view text, std::size_t y);

/// Reformulation of a single conversation turn: its top-y keywords. Turns
/// with fewer than three distinct content terms skip scoring and return all
/// of them.
std::vector<std::string> turn_terms(std::string_view question, std::size_t y);

/// 1 - levenshtein(a, b) / max(|a|, |b|); 1.0 for two empty strings.
double levenshtein_similarity(std::string_view a, std::string_view b);

}  // namespace normy::keyphrase
