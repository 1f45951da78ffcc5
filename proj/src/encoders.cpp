#include "normy/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "normy/remote.hpp"
#include "normy/text.hpp"

namespace normy::encoders {

Embedding Embedding::from_values(std::vector<double> values) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    return {std::move(values), std::sqrt(sq)};
}

Similarity cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                                    std::to_string(b.dim()) + ")");
    }
    if (a.degenerate() || b.degenerate()) return {0.0, true};
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
    const double c = dot / (a.norm * b.norm);
    return {std::clamp(c, -1.0, 1.0), false};
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<Embedding> Embedder::embed_batch(std::span<const std::string> texts) const {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

std::vector<double> RelevanceScorer::score_batch(const std::vector<std::string>& window,
                                                 const std::string& question,
                                                 std::span<const Passage* const> passages) const {
    std::vector<double> out;
    out.reserve(passages.size());
    for (const Passage* p : passages) out.push_back(score(RelevanceInput{window, question, *p}));
    return out;
}

Embedding BuiltinEmbedder::embed(std::string_view text) const {
    std::map<std::string, int> tf;
    for (auto& t : text::tokenize(text)) ++tf[std::move(t)];
    std::vector<double> values(kEmbeddingDim, 0.0);
    for (const auto& [token, count] : tf) {
        values[fnv1a64(token) % kEmbeddingDim] += 1.0 + std::log(static_cast<double>(count));
    }
    auto e = Embedding::from_values(std::move(values));
    if (!e.degenerate()) {
        for (double& v : e.values) v /= e.norm;
        e.norm = 1.0;
    }
    return e;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::set<std::string> sa(a.begin(), a.end());
    const std::set<std::string> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

double BuiltinRelevanceScorer::score(const RelevanceInput& input) const {
    std::vector<std::string> query;
    for (const auto& turn : input.window_turns) {
        auto t = text::index_terms(turn);
        query.insert(query.end(), t.begin(), t.end());
    }
    auto q = text::index_terms(input.question);
    query.insert(query.end(), q.begin(), q.end());
    return jaccard(query, text::content_terms(input.passage.tokens));
}

SpanScores BuiltinSpanScorer::span_scores(std::string_view question, const Passage& passage) const {
    const auto q_terms = text::index_terms(question);
    const std::set<std::string> q(q_terms.begin(), q_terms.end());
    const auto& tokens = passage.tokens;
    const std::size_t len = tokens.size();
    SpanScores out{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
    if (q.empty()) return out;

    // Positions of each question term; a window's overlap is the number of
    // distinct question terms with a position inside it.
    std::vector<int> term_of(len, -1);
    std::map<std::string, int> ids;
    for (const auto& t : q) ids.emplace(t, static_cast<int>(ids.size()));
    for (std::size_t m = 0; m < len; ++m) {
        auto it = ids.find(tokens[m]);
        if (it != ids.end()) term_of[m] = it->second;
    }
    auto overlap = [&](std::size_t lo, std::size_t hi) {
        std::vector<char> hit(ids.size(), 0);
        std::size_t n = 0;
        for (std::size_t m = lo; m < hi; ++m) {
            if (term_of[m] >= 0 && !hit[static_cast<std::size_t>(term_of[m])]) {
                hit[static_cast<std::size_t>(term_of[m])] = 1;
                ++n;
            }
        }
        return static_cast<double>(n) / static_cast<double>(q.size());
    };
    for (std::size_t m = 0; m < len; ++m) {
        out.start[m] = overlap(m, std::min(len, m + window_));
        out.end[m] = overlap(m >= window_ ? m - window_ : 0, m + 1);
    }
    return out;
}

void NeuralScorerHandle::validate() const {
    if (kind == ScorerKind::Remote && endpoint.empty()) {
        throw std::invalid_argument("remote scorer handle requires an endpoint");
    }
}

Scorers builtin_scorers() {
    return {std::make_shared<BuiltinEmbedder>(), std::make_shared<BuiltinRelevanceScorer>(),
            std::make_shared<BuiltinSpanScorer>()};
}

Scorers make_scorers(const NeuralScorerHandle& handle) {
    handle.validate();
    if (handle.kind == ScorerKind::Builtin) return builtin_scorers();
    auto client = std::make_shared<RemoteClient>(handle.endpoint, handle.timeout, handle.request_budget);
    return {std::make_shared<RemoteEmbedder>(client), std::make_shared<RemoteRelevanceScorer>(client),
            std::make_shared<RemoteSpanScorer>(client)};
}

}  // namespace normy::encoders
