#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "normy/corpus_index.hpp"
#include "normy/encoders.hpp"
#include "normy/history.hpp"
#include "normy/reader.hpp"
#include "normy/reranker.hpp"
#include "normy/retriever.hpp"

namespace normy::config {

/// Merged runtime configuration. Text form is one `key = value` per line;
/// `#` starts a comment. Keys mirror the field names, e.g. `bm25.k1`,
/// `retriever.lambda`, `scorer.endpoint`.
struct AppConfig {
    Bm25Params bm25;
    retriever::RetrieverConfig retriever;
    reranker::RerankConfig rerank;
    reader::ReaderConfig reader;
    history::StrategyConfig strategy;
    encoders::NeuralScorerHandle scorer;
    std::size_t jobs = 1;

    /// Assigns one field. Throws std::invalid_argument for an unknown key or
    /// an unparsable value.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;

    /// Applies every assignment in the stream; errors name `source` and line.
    void apply(std::istream& in, std::string_view source = "config");
    void apply_file(const std::string& path);

    /// Runs every owning type's validate().
    void validate() const;

    /// Every key with its current value, in keys() order.
    std::string to_text() const;

    static const std::vector<std::string>& keys();
};

}  // namespace normy::config
