#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "normy/text.hpp"

// Straight-line keyword scoring for ASCII text, written from the feature
// definitions without reusing the library's tokenizer or scorer.
namespace oracle {

struct YakeWord {
    std::string raw;
    std::string low;
    int sentence = 0;
    std::string gap_before;  // characters between the previous word and this one
};

struct YakeStats {
    int tf = 0;
    double w_case = 0, w_pos = 0, w_freq = 0, w_rel = 0, w_difs = 0, score = 0;
};

struct YakePhrase {
    std::string phrase;
    double score = 0;
};

inline std::vector<YakeWord> yake_words(const std::string& text) {
    std::vector<YakeWord> out;
    int sentence = 0;
    std::string gap;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isalnum(static_cast<unsigned char>(text[i]))) {
            std::size_t j = i;
            while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
            // A sentence ends at . ? or ! followed by whitespace.
            for (std::size_t g = 0; g + 1 < gap.size(); ++g) {
                if ((gap[g] == '.' || gap[g] == '?' || gap[g] == '!') && std::isspace(static_cast<unsigned char>(gap[g + 1]))) {
                    if (!out.empty()) ++sentence;
                    break;
                }
            }
            YakeWord w;
            w.raw = text.substr(i, j - i);
            for (char c : w.raw) w.low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            w.sentence = sentence;
            w.gap_before = gap;
            out.push_back(w);
            gap.clear();
            i = j;
        } else {
            gap += text[i];
            ++i;
        }
    }
    return out;
}

inline bool yake_stop(const std::string& w) { return normy::text::is_stopword(w); }

inline std::map<std::string, YakeStats> yake_features(const std::string& text) {
    const auto words = yake_words(text);
    std::map<std::string, YakeStats> out;
    if (words.empty()) return out;
    const int sentences = words.back().sentence + 1;

    std::map<std::string, int> tf, upper, acro;
    std::map<std::string, std::vector<int>> where;
    std::map<std::string, std::set<std::string>> around;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        if (yake_stop(w.low)) continue;
        tf[w.low] += 1;
        const bool first_in_sentence = i == 0 || words[i - 1].sentence != w.sentence;
        if (std::isupper(static_cast<unsigned char>(w.raw[0])) && !first_in_sentence) upper[w.low] += 1;
        int letters = 0;
        bool all_upper = true;
        for (char c : w.raw) {
            if (std::isalpha(static_cast<unsigned char>(c))) {
                ++letters;
                if (!std::isupper(static_cast<unsigned char>(c))) all_upper = false;
            }
        }
        if (letters >= 2 && all_upper) acro[w.low] += 1;
        where[w.low].push_back(w.sentence);
        if (i > 0 && words[i - 1].sentence == w.sentence) around[w.low].insert(words[i - 1].low);
        if (i + 1 < words.size() && words[i + 1].sentence == w.sentence) around[w.low].insert(words[i + 1].low);
    }
    if (tf.empty()) return out;

    double mean = 0;
    int max_tf = 0;
    for (const auto& [t, c] : tf) {
        mean += c;
        max_tf = std::max(max_tf, c);
    }
    mean /= static_cast<double>(tf.size());
    double var = 0;
    for (const auto& [t, c] : tf) var += (c - mean) * (c - mean);
    const double sd = std::sqrt(var / static_cast<double>(tf.size()));

    for (const auto& [t, c] : tf) {
        YakeStats s;
        s.tf = c;
        s.w_case = std::max(upper[t], acro[t]) / (1 + std::log(static_cast<double>(c)));
        auto pos = where[t];
        std::sort(pos.begin(), pos.end());
        const double med = pos.size() % 2 == 1 ? pos[pos.size() / 2]
                                               : (pos[pos.size() / 2 - 1] + pos[pos.size() / 2]) / 2.0;
        s.w_pos = std::log(std::log(3 + med));
        s.w_freq = c / (mean + sd);
        s.w_rel = 1 + (static_cast<double>(around[t].size()) / c) * (static_cast<double>(c) / max_tf);
        s.w_difs = static_cast<double>(std::set<int>(pos.begin(), pos.end()).size()) / sentences;
        s.score = (s.w_rel * s.w_pos) / (s.w_case + s.w_freq / s.w_rel + s.w_difs / s.w_rel);
        out[t] = s;
    }
    return out;
}

inline double edit_similarity(const std::string& a, const std::string& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 && m == 0) return 1;
    std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
    for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
        }
    }
    return 1 - static_cast<double>(d[n][m]) / static_cast<double>(std::max(n, m));
}

inline std::vector<YakePhrase> yake_top(const std::string& text, std::size_t y) {
    const auto words = yake_words(text);
    const auto stats = yake_features(text);

    struct Cand {
        std::string phrase;
        double score;
        std::size_t first;
        std::size_t len;
    };
    std::vector<Cand> cands;
    std::set<std::string> seen;
    std::vector<std::size_t> run;
    auto take_run = [&] {
        for (std::size_t a = 0; a < run.size(); ++a) {
            std::string phrase;
            double product = 1, tf_sum = 0;
            for (std::size_t len = 1; len <= 3 && a + len <= run.size(); ++len) {
                const auto& w = words[run[a + len - 1]];
                phrase += (len > 1 ? " " : "") + w.low;
                product *= stats.at(w.low).score;
                tf_sum += stats.at(w.low).tf;
                if (seen.insert(phrase).second) cands.push_back({phrase, product / (1 + tf_sum), run[a], len});
            }
        }
        run.clear();
    };
    for (std::size_t i = 0; i < words.size(); ++i) {
        const bool stop = yake_stop(words[i].low);
        const bool joined = !run.empty() && words[i].sentence == words[run.back()].sentence &&
                            words[i].gap_before.find_first_of(",;:()[]{}\".!?") == std::string::npos;
        if (stop || !joined) take_run();
        if (!stop) run.push_back(i);
    }
    take_run();

    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score < b.score;
        if (a.first != b.first) return a.first < b.first;
        return a.len < b.len;
    });
    std::vector<YakePhrase> out;
    for (const auto& c : cands) {
        if (out.size() == y) break;
        bool dup = false;
        for (const auto& o : out) dup = dup || edit_similarity(o.phrase, c.phrase) >= 0.8;
        if (!dup) out.push_back({c.phrase, c.score});
    }
    return out;
}

}  // namespace oracle
