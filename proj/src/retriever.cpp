#include "normy/retriever.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

#include "normy/keyphrase.hpp"

namespace normy::retriever {

void RetrieverConfig::validate() const {
    if (k < 1) throw std::invalid_argument("retriever k must be >= 1");
    if (y < 1) throw std::invalid_argument("retriever y must be >= 1");
    if (!(lambda >= 0.0)) throw std::invalid_argument("retriever lambda must be >= 0");
}

double decay_score(double bm25, std::size_t age, double lambda, std::span<const double> sims) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("decay_score: lambda must be >= 0");
    double factor = 1.0;
    if (!sims.empty()) {
        double sum = 0.0;
        for (double s : sims) sum += std::clamp(s, 0.0, 1.0);
        factor = sum / static_cast<double>(sims.size());
    }
    return std::max(bm25 - lambda * static_cast<double>(age), 0.0) * factor;
}

const encoders::Embedding& EmbeddingCache::get(const InvertedIndex& index, std::uint32_t doc) {
    {
        std::shared_lock lock(mu_);
        auto it = cache_.find(doc);
        if (it != cache_.end()) return it->second;
    }
    auto e = embedder_.embed(index.passage(doc).text);
    std::unique_lock lock(mu_);
    return cache_.try_emplace(doc, std::move(e)).first->second;
}

std::vector<ScoredPassage> bm25_retrieve(const InvertedIndex& index, std::span<const std::string> query,
                                         std::size_t k, std::size_t turn) {
    std::vector<ScoredPassage> out;
    for (const auto& hit : index.retrieve_topk(query, k)) {
        ScoredPassage sp;
        sp.passage = &index.passage(hit.doc);
        sp.doc = hit.doc;
        sp.bm25 = hit.score;
        sp.origin_turn = turn;
        sp.s_rt = hit.score;
        out.push_back(sp);
    }
    return out;
}

std::vector<ScoredPassage> normy_retrieve(const InvertedIndex& index, const encoders::Embedder& embedder,
                                          std::span<const std::string> questions, std::size_t n,
                                          const RetrieverConfig& config, EmbeddingCache* cache) {
    config.validate();
    if (n >= questions.size()) throw std::out_of_range("normy_retrieve: turn index out of range");

    std::optional<EmbeddingCache> local;
    if (!cache) cache = &local.emplace(embedder);

    std::map<std::uint32_t, ScoredPassage> pool;  // keyed by doc for deterministic iteration
    std::vector<std::string> context;             // R(C) as a multiset
    std::vector<std::uint32_t> previous;          // P_{i-1}

    for (std::size_t i = 0; i <= n; ++i) {
        const auto r_qi = keyphrase::turn_terms(questions[i], config.y);
        context.insert(context.end(), r_qi.begin(), r_qi.end());
        const auto hits = index.retrieve_topk(context, config.k);

        std::vector<std::uint32_t> current;
        for (const auto& hit : hits) current.push_back(hit.doc);
        // Turn 0 has no predecessor; its passages are compared with P_0 itself.
        // A single-turn conversation has no history and keeps plain BM25.
        const auto& reference = i == 0 ? current : previous;
        for (const auto& hit : hits) {
            double sim_factor = 1.0;
            if (config.use_sim && n > 0 && !reference.empty()) {
                const auto& e = cache->get(index, hit.doc);
                double sum = 0.0;
                for (auto ref : reference) {
                    sum += std::clamp(encoders::cosine_sim(e, cache->get(index, ref)), 0.0, 1.0);
                }
                sim_factor = sum / static_cast<double>(reference.size());
            }
            auto [it, inserted] = pool.try_emplace(hit.doc);
            auto& sp = it->second;
            if (inserted) {
                sp.passage = &index.passage(hit.doc);
                sp.doc = hit.doc;
            }
            // A recurring passage keeps its best BM25 and the latest turn.
            sp.bm25 = inserted ? hit.score : std::max(sp.bm25, hit.score);
            sp.origin_turn = i;
            sp.sim_factor = sim_factor;
        }
        previous = std::move(current);
    }

    const double lambda = config.use_decay ? config.lambda : 0.0;
    std::vector<ScoredPassage> out;
    out.reserve(pool.size());
    for (auto& [_, sp] : pool) {
        const double sims[1] = {sp.sim_factor};
        sp.s_rt = decay_score(sp.bm25, n - sp.origin_turn, lambda, sims);
        out.push_back(sp);
    }
    std::sort(out.begin(), out.end(), [](const ScoredPassage& a, const ScoredPassage& b) {
        if (a.s_rt != b.s_rt) return a.s_rt > b.s_rt;
        return a.doc < b.doc;
    });
    if (out.size() > config.k) out.resize(config.k);
    return out;
}

}  // namespace normy::retriever
