#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>

#include "json.hpp"
#include "normy/encoders.hpp"

namespace normy::encoders {

/// JSON-over-HTTP client for the model-server wire contract:
///
///   POST /embed  {"texts": [str]}                          -> {"vectors": [[768 floats]]}
///   POST /rerank {"window": [str], "question": str,
///                 "passages": [{"id": str, "text": str}]}  -> {"scores": [float in [0,1]]}
///   POST /read   {"question": str, "passage": str}         -> {"start": [float], "end": [float],
///                                                               "tokens": [str]}
///   GET  /healthz                                          -> 200 "ok"
///
/// One connection per request, so a client may be shared across threads.
class RemoteClient {
public:
    RemoteClient(std::string endpoint, std::chrono::milliseconds timeout, std::size_t request_budget = 0);

    nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
    /// Raw response body of a POST; used by contract checks that compare bytes.
    std::string post_raw(const std::string& path, const std::string& body) const;
    std::string get_raw(const std::string& path) const;

    const std::string& endpoint() const { return endpoint_; }
    std::size_t requests_made() const { return used_.load(); }

private:
    void charge() const;

    std::string endpoint_;
    std::chrono::milliseconds timeout_;
    std::size_t budget_;
    mutable std::atomic<std::size_t> used_{0};
};

class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(std::shared_ptr<const RemoteClient> client) : client_(std::move(client)) {}
    Embedding embed(std::string_view text) const override;
    std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;

private:
    std::shared_ptr<const RemoteClient> client_;
};

class RemoteRelevanceScorer final : public RelevanceScorer {
public:
    explicit RemoteRelevanceScorer(std::shared_ptr<const RemoteClient> client) : client_(std::move(client)) {}
    double score(const RelevanceInput& input) const override;
    std::vector<double> score_batch(const std::vector<std::string>& window, const std::string& question,
                                    std::span<const Passage* const> passages) const override;

private:
    std::shared_ptr<const RemoteClient> client_;
};

class RemoteSpanScorer final : public SpanScorer {
public:
    explicit RemoteSpanScorer(std::shared_ptr<const RemoteClient> client) : client_(std::move(client)) {}
    SpanScores span_scores(std::string_view question, const Passage& passage) const override;

private:
    std::shared_ptr<const RemoteClient> client_;
};

/// Maps per-subword logits onto the passage's word tokens by walking both
/// character streams. A word takes the start logit of its first matching
/// subword and the end logit of its last; unmatched words get the minimum
/// logit seen. Subword markers ("##", "Ġ", "▁") are ignored.
SpanScores align_span_logits(const std::vector<std::string>& passage_tokens,
                             const std::vector<std::string>& server_tokens, const std::vector<double>& start,
                             const std::vector<double>& end);

}  // namespace normy::encoders
