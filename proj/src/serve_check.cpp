#include "normy/serve_check.hpp"

#include <functional>

#include "httplib.h"
#include "json.hpp"
#include "normy/corpus_index.hpp"
#include "normy/remote.hpp"

namespace normy::serve_check {

namespace {

const std::vector<std::string> kEmbedTexts = {"who wrote the play hamlet",
                                              "William Shakespeare wrote Hamlet around 1600 ."};
const std::vector<std::string> kWindow = {"who wrote the play hamlet", "when was it first performed"};
const std::string kQuestion = "where was it staged";
const std::string kPassage = "Hamlet was first staged at the Globe Theatre in London .";

std::vector<Passage> probe_passages() {
    return {Passage::make("probe-1", "Hamlet", kPassage),
            Passage::make("probe-2", "Globe", "The Globe Theatre was built in 1599 by the Lord Chamberlain's Men ."),
            Passage::make("probe-3", "Weather", "Light rain is expected over the coast tomorrow .")};
}

nlohmann::json rerank_body() {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& p : probe_passages()) items.push_back({{"id", p.id}, {"text", p.text}});
    return {{"window", kWindow}, {"question", kQuestion}, {"passages", items}};
}

ProbeResult probe(const std::string& name, const std::function<std::string()>& body) {
    try {
        return {name, true, body()};
    } catch (const std::exception& e) {
        return {name, false, e.what()};
    }
}

}  // namespace

bool ContractReport::ok() const {
    for (const auto& p : probes) {
        if (!p.ok) return false;
    }
    return !probes.empty();
}

std::string ContractReport::to_json() const {
    nlohmann::ordered_json j;
    j["endpoint"] = endpoint;
    j["ok"] = ok();
    j["probes"] = nlohmann::ordered_json::array();
    for (const auto& p : probes) {
        nlohmann::ordered_json o;
        o["name"] = p.name;
        o["ok"] = p.ok;
        o["detail"] = p.detail;
        j["probes"].push_back(std::move(o));
    }
    return j.dump();
}

ContractReport run(const std::string& endpoint, std::chrono::milliseconds timeout) {
    ContractReport report{endpoint, {}};
    auto client = std::make_shared<const encoders::RemoteClient>(endpoint, timeout);
    const encoders::RemoteEmbedder embedder(client);
    const encoders::RemoteRelevanceScorer reranker(client);
    const encoders::RemoteSpanScorer reader(client);
    const auto passages = probe_passages();

    report.probes.push_back(probe("healthz", [&] {
        const auto body = client->get_raw("/healthz");
        auto trimmed = body;
        while (!trimmed.empty() && (trimmed.back() == '\n' || trimmed.back() == '\r')) trimmed.pop_back();
        if (trimmed != "ok" && trimmed != "\"ok\"") throw std::runtime_error("body is not \"ok\"");
        return std::string("200 ok");
    }));

    report.probes.push_back(probe("embed-shape", [&] {
        const auto vectors = embedder.embed_batch(kEmbedTexts);
        for (const auto& v : vectors) {
            if (v.degenerate()) throw std::runtime_error("zero vector");
        }
        return std::to_string(vectors.size()) + " vectors of dimension " + std::to_string(encoders::kEmbeddingDim);
    }));

    report.probes.push_back(probe("embed-deterministic", [&] {
        const auto body = nlohmann::json{{"texts", kEmbedTexts}}.dump();
        if (client->post_raw("/embed", body) != client->post_raw("/embed", body)) {
            throw std::runtime_error("repeated request returned different bytes");
        }
        return std::string("identical responses");
    }));

    report.probes.push_back(probe("rerank-range", [&] {
        std::vector<const Passage*> ptrs;
        for (const auto& p : passages) ptrs.push_back(&p);
        const auto scores = reranker.score_batch(kWindow, kQuestion, ptrs);
        return std::to_string(scores.size()) + " scores in [0, 1]";
    }));

    report.probes.push_back(probe("rerank-empty-window", [&] {
        const Passage* p = &passages.front();
        reranker.score_batch({}, kQuestion, std::span<const Passage* const>(&p, 1));
        return std::string("1 score in [0, 1]");
    }));

    report.probes.push_back(probe("rerank-deterministic", [&] {
        const auto body = rerank_body().dump();
        if (client->post_raw("/rerank", body) != client->post_raw("/rerank", body)) {
            throw std::runtime_error("repeated request returned different bytes");
        }
        return std::string("identical responses");
    }));

    report.probes.push_back(probe("read-shape", [&] {
        const auto scores = reader.span_scores(kQuestion, passages.front());
        if (scores.start.size() != passages.front().length()) throw std::runtime_error("alignment lost tokens");
        return std::to_string(scores.start.size()) + " aligned token scores";
    }));

    report.probes.push_back(probe("malformed-400", [&] {
        httplib::Client cli(client->endpoint());
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        cli.set_connection_timeout(secs.count(), 0);
        cli.set_read_timeout(secs.count(), 0);
        auto res = cli.Post("/embed", "{\"texts\": [", "application/json");
        if (!res) throw std::runtime_error("transport error: " + httplib::to_string(res.error()));
        if (res->status != 400) throw std::runtime_error("expected HTTP 400, got " + std::to_string(res->status));
        const auto j = nlohmann::json::parse(res->body, nullptr, false);
        if (!j.is_object() || !j.contains("error")) throw std::runtime_error("400 body lacks \"error\"");
        return std::string("400 with error body");
    }));

    return report;
}

}  // namespace normy::serve_check
