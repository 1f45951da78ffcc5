#include "normy/metrics.hpp"

#include <cctype>
#include <stdexcept>

namespace normy::metrics {

namespace {

const std::string& gold_for(const ModuleResult& r, const GoldPassages& gold) {
    auto it = gold.find(r.qid);
    if (it == gold.end()) throw std::invalid_argument("no gold passage for qid " + r.qid);
    return it->second;
}

}  // namespace

double mrr(std::span<const ModuleResult> results, const GoldPassages& gold) {
    if (results.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : results) {
        const auto& g = gold_for(r, gold);
        for (std::size_t i = 0; i < r.ranked_passage_ids.size(); ++i) {
            if (r.ranked_passage_ids[i] == g) {
                sum += 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
    }
    return sum / static_cast<double>(results.size());
}

double recall_at_k(std::span<const ModuleResult> results, const GoldPassages& gold, std::size_t k) {
    if (k < 1) throw std::invalid_argument("recall_at_k: k must be >= 1");
    if (results.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& r : results) {
        const auto& g = gold_for(r, gold);
        const auto n = std::min(k, r.ranked_passage_ids.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (r.ranked_passage_ids[i] == g) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

std::vector<std::string> normalize_answer(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    const auto flush = [&] {
        if (!cur.empty() && cur != "a" && cur != "an" && cur != "the") out.push_back(cur);
        cur.clear();
    };
    for (const char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::isspace(u)) {
            flush();
        } else if (u < 0x80 && std::ispunct(u)) {
            continue;
        } else {
            cur += u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
        }
    }
    flush();
    return out;
}

double token_f1(std::string_view predicted, std::string_view gold) {
    const auto p = normalize_answer(predicted);
    const auto g = normalize_answer(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::map<std::string_view, int> counts;
    for (const auto& t : g) ++counts[t];
    std::size_t common = 0;
    for (const auto& t : p) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(p.size());
    const double recall = static_cast<double>(common) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace normy::metrics
