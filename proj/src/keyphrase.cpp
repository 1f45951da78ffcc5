#include "normy/keyphrase.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "normy/text.hpp"

namespace normy::keyphrase {

namespace {

// Punctuation between two words that ends a candidate run.
bool breaks_run(std::string_view gap) {
    return gap.find_first_of(",;:()[]{}\".!?") != std::string_view::npos;
}

double median(std::vector<std::size_t> values) {
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    if (n % 2 == 1) return static_cast<double>(values[n / 2]);
    return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

struct Accum {
    int tf = 0;
    int capitalized = 0;
    int acronym = 0;
    std::vector<std::size_t> sentences;
    std::set<std::string> neighbors;
};

}  // namespace

double word_score(double w_case, double w_pos, double w_freq, double w_rel, double w_difs) {
    return (w_rel * w_pos) / (w_case + w_freq / w_rel + w_difs / w_rel);
}

std::map<std::string, WordStats> word_features(std::string_view text) {
    const auto words = text::split_words(text);
    std::map<std::string, WordStats> out;
    if (words.empty()) return out;

    const std::size_t sentence_count = words.back().sentence + 1;
    std::map<std::string, Accum> acc;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        if (text::is_stopword(w.norm)) continue;
        auto& a = acc[w.norm];
        ++a.tf;
        const bool sentence_initial = i == 0 || words[i - 1].sentence != w.sentence;
        if (w.capitalized && !sentence_initial) ++a.capitalized;
        if (w.acronym) ++a.acronym;
        a.sentences.push_back(w.sentence);
        if (i > 0 && words[i - 1].sentence == w.sentence) a.neighbors.insert(words[i - 1].norm);
        if (i + 1 < words.size() && words[i + 1].sentence == w.sentence) a.neighbors.insert(words[i + 1].norm);
    }
    if (acc.empty()) return out;

    double sum = 0.0;
    int max_tf = 0;
    for (const auto& [_, a] : acc) {
        sum += a.tf;
        max_tf = std::max(max_tf, a.tf);
    }
    const double mean_tf = sum / static_cast<double>(acc.size());
    double var = 0.0;
    for (const auto& [_, a] : acc) var += (a.tf - mean_tf) * (a.tf - mean_tf);
    const double sd_tf = std::sqrt(var / static_cast<double>(acc.size()));

    for (auto& [term, a] : acc) {
        WordStats s;
        s.term = term;
        s.tf = a.tf;
        const double tf = a.tf;
        s.w_case = std::max(a.capitalized, a.acronym) / (1.0 + std::log(tf));
        s.w_pos = std::log(std::log(3.0 + median(a.sentences)));
        s.w_freq = tf / (mean_tf + sd_tf);
        s.w_rel = 1.0 + (static_cast<double>(a.neighbors.size()) / tf) * (tf / max_tf);
        const std::set<std::size_t> distinct_sentences(a.sentences.begin(), a.sentences.end());
        s.w_difs = static_cast<double>(distinct_sentences.size()) / static_cast<double>(sentence_count);
        s.score = word_score(s.w_case, s.w_pos, s.w_freq, s.w_rel, s.w_difs);
        out.emplace(term, std::move(s));
    }
    return out;
}

std::vector<Keyphrase> extract_keyphrases(std::string_view text, std::size_t y) {
    if (y == 0) throw std::invalid_argument("extract_keyphrases: y must be >= 1");
    const auto words = text::split_words(text);
    const auto stats = word_features(text);
    if (stats.empty()) return {};

    // Runs of consecutive non-stopword words inside one sentence.
    std::vector<std::vector<std::size_t>> runs;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const bool stop = text::is_stopword(words[i].norm);
        bool contiguous = !current.empty();
        if (contiguous) {
            const auto& prev = words[current.back()];
            const auto gap_begin = prev.offset + prev.raw.size();
            contiguous = prev.sentence == words[i].sentence &&
                         !breaks_run(text.substr(gap_begin, words[i].offset - gap_begin));
        }
        if (stop || !contiguous) {
            if (!current.empty()) runs.push_back(std::move(current));
            current.clear();
        }
        if (!stop) current.push_back(i);
    }
    if (!current.empty()) runs.push_back(std::move(current));

    std::vector<Keyphrase> candidates;
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& run : runs) {
        for (std::size_t start = 0; start < run.size(); ++start) {
            for (std::size_t len = 1; len <= kMaxNgram && start + len <= run.size(); ++len) {
                Keyphrase k;
                double product = 1.0;
                double tf_sum = 0.0;
                for (std::size_t j = start; j < start + len; ++j) {
                    const auto& st = stats.at(words[run[j]].norm);
                    k.terms.push_back(st.term);
                    product *= st.score;
                    tf_sum += st.tf;
                }
                k.phrase = text::join(k.terms);
                if (seen.contains(k.phrase)) continue;
                k.score = product / (1.0 + tf_sum);
                k.first_occurrence = run[start];
                seen.emplace(k.phrase, candidates.size());
                candidates.push_back(std::move(k));
            }
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const Keyphrase& a, const Keyphrase& b) {
        if (a.score != b.score) return a.score < b.score;
        if (a.first_occurrence != b.first_occurrence) return a.first_occurrence < b.first_occurrence;
        return a.terms.size() < b.terms.size();
    });

    std::vector<Keyphrase> selected;
    for (auto& c : candidates) {
        if (selected.size() == y) break;
        const bool near_duplicate = std::any_of(selected.begin(), selected.end(), [&](const Keyphrase& s) {
            return levenshtein_similarity(s.phrase, c.phrase) >= kDedupThreshold;
        });
        if (!near_duplicate) selected.push_back(std::move(c));
    }
    return selected;
}

std::vector<std::string> top_keywords(std::string_view text, std::size_t y) {
    if (y == 0) throw std::invalid_argument("top_keywords: y must be >= 1");
    const auto features = word_features(text);
    auto order = text::distinct(text::index_terms(text));  // first-occurrence order
    std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        return features.at(a).score < features.at(b).score;
    });
    if (order.size() > y) order.resize(y);
    return order;
}

std::vector<std::string> turn_terms(std::string_view question, std::size_t y) {
    auto content = text::distinct(text::index_terms(question));
    if (content.size() < 3) return content;
    return top_keywords(question, y);
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
    const auto longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return 1.0 - static_cast<double>(prev[b.size()]) / static_cast<double>(longest);
}

}  // namespace normy::keyphrase
