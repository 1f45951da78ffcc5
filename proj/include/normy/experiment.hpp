#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "normy/corpus_index.hpp"
#include "normy/encoders.hpp"
#include "normy/history.hpp"
#include "normy/metrics.hpp"
#include "normy/reader.hpp"
#include "normy/reranker.hpp"
#include "normy/retriever.hpp"

namespace normy::experiment {

enum class Module { Retriever, Reranker, Reader, Pipeline };

std::string_view module_name(Module m);
std::optional<Module> parse_module(std::string_view name);

/// Pipeline-mode rows. The first three are the full pipeline and its two
/// ablations; the last two apply one history model uniformly to all modules.
inline constexpr std::string_view kPipelineNormy = "normy";
inline constexpr std::string_view kPipelineNoDecay = "normy-no-decay";
inline constexpr std::string_view kPipelineNoSim = "normy-no-sim";
inline constexpr std::string_view kPipelineFixedWindow = "orconvqa";
inline constexpr std::string_view kPipelineWindowAnswers = "convadr";

struct ExperimentConfig {
    Module module = Module::Retriever;
    /// Strategy names (retriever/reranker/reader) or pipeline row names.
    /// Empty selects default_rows(module).
    std::vector<std::string> rows;
    history::StrategyConfig strategy;  // w, y, threshold shared by all rows
    retriever::RetrieverConfig retriever;
    reranker::RerankConfig rerank;
    reader::ReaderConfig reader;
    std::vector<std::size_t> recall_ks{1, 5, 10};
    std::size_t jobs = 1;

    /// Throws std::invalid_argument for unknown row names or bad values.
    void validate() const;
    std::vector<std::string> effective_rows() const;
};

std::vector<std::string> default_rows(Module m);

struct Prediction {
    std::string conv_id;
    std::string qid;
    std::size_t turn = 0;
    std::string passage_id;
    std::string answer;
    double f1 = 0.0;
};

struct RowReport {
    std::string name;
    std::size_t questions = 0;
    std::vector<std::pair<std::string, double>> metrics;  // in column order
    std::optional<std::string> error;
    std::vector<Prediction> predictions;  // pipeline mode only

    std::optional<double> metric(std::string_view column) const;
};

struct Report {
    Module module = Module::Retriever;
    std::vector<std::string> columns;
    std::vector<RowReport> rows;

    const RowReport* row(std::string_view name) const;
};

/// Runs every configured row over each (conversation, turn) that has gold
/// labels. A row that throws is reported with its error and no metrics.
Report run_experiment(const ExperimentConfig& config, const InvertedIndex& index,
                      const std::vector<history::Conversation>& conversations, const metrics::GoldPassages& gold,
                      const encoders::Scorers& scorers);

/// Passages retrieved for turn n under a retriever-module strategy name,
/// ranked exactly as run_experiment ranks them.
std::vector<retriever::ScoredPassage> retrieve_turn(const ExperimentConfig& config, const InvertedIndex& index,
                                                    const encoders::Scorers& scorers,
                                                    std::span<const std::string> questions, std::size_t n,
                                                    std::string_view strategy);

/// One JSON object per row, followed in pipeline mode by one object per
/// prediction. Deterministic for identical inputs.
std::string to_jsonl(const Report& report);
/// Fixed-width table: one line per row, one column per metric.
std::string render_table(const Report& report);

}  // namespace normy::experiment
