#include "normy/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "normy/text.hpp"

namespace normy::experiment {

using history::Strategy;
using retriever::ScoredPassage;

namespace {

constexpr std::string_view kPipelineRows[] = {kPipelineNormy, kPipelineNoDecay, kPipelineNoSim,
                                              kPipelineFixedWindow, kPipelineWindowAnswers};

bool is_pipeline_row(std::string_view name) {
    return std::find(std::begin(kPipelineRows), std::end(kPipelineRows), name) != std::end(kPipelineRows);
}

// One evaluated turn of one row.
struct TurnOutcome {
    std::size_t turn = 0;
    std::vector<std::string> ranked;
    std::optional<std::string> answer;
    std::string answer_passage;
};

// Everything a row needs while processing one conversation.
struct ConvContext {
    const ExperimentConfig& config;
    const InvertedIndex& index;
    const encoders::Scorers& scorers;
    retriever::EmbeddingCache& cache;
    const history::HeuristicRewriter& rewriter;
    std::vector<std::string> questions;
    std::unique_ptr<history::MemoizedAnswers> window_answers;  // lazily built
};

std::vector<std::string> ids_of(const std::vector<ScoredPassage>& ps) {
    std::vector<std::string> out;
    out.reserve(ps.size());
    for (const auto& p : ps) out.push_back(p.id());
    return out;
}

history::StrategyConfig strategy_config(const ExperimentConfig& cfg, Strategy s) {
    auto sc = cfg.strategy;
    sc.strategy = s;
    return sc;
}

// Fixed-window pipeline applied uniformly to all three modules.
reader::AnswerSpan fixed_window_pipeline(ConvContext& cc, std::size_t n, std::vector<ScoredPassage>* reranked_out) {
    const auto& cfg = cc.config;
    const auto ctx = history::model_history(strategy_config(cfg, Strategy::FixedWindow), cc.questions, n);
    auto retrieved = retriever::bm25_retrieve(cc.index, history::query_terms(ctx), cfg.retriever.k, n);
    auto reranked = reranker::rerank_with(reranker::window_turns(cc.questions, n, cfg.strategy.w), cc.questions[n],
                                          std::move(retrieved), *cc.scorers.relevance);
    auto span = reader::answer_with_question(history::context_text(ctx), reranked, cfg.reader, *cc.scorers.span);
    if (reranked_out) *reranked_out = std::move(reranked);
    return span;
}

history::MemoizedAnswers& window_answers(ConvContext& cc) {
    if (!cc.window_answers) {
        cc.window_answers = std::make_unique<history::MemoizedAnswers>(
            [&cc](std::size_t i) { return fixed_window_pipeline(cc, i, nullptr).text; });
    }
    return *cc.window_answers;
}

history::HistoryDeps deps_for(ConvContext& cc) {
    history::HistoryDeps deps;
    deps.embedder = cc.scorers.embedder.get();
    deps.rewriter = &cc.rewriter;
    deps.answers = [&cc](std::size_t i) { return window_answers(cc)(i); };
    return deps;
}

history::QueryContext context_for(ConvContext& cc, Strategy s, std::size_t n) {
    return history::model_history(strategy_config(cc.config, s), cc.questions, n, deps_for(cc));
}

// Rerank input (window, question) derived from a strategy's context.
std::pair<std::vector<std::string>, std::string> rerank_input(ConvContext& cc, Strategy s, std::size_t n) {
    if (s == Strategy::FixedWindow || s == Strategy::Normy) {
        return {reranker::window_turns(cc.questions, n, cc.config.rerank.w), cc.questions[n]};
    }
    const auto ctx = context_for(cc, s, n);
    std::vector<std::string> window;
    std::string question = cc.questions[n];
    if (const auto* seq = std::get_if<history::TokenSequence>(&ctx)) {
        const auto hist = seq->tokens.size() - seq->question_tokens;
        if (hist > 0) {
            window.push_back(text::join({seq->tokens.begin(), seq->tokens.begin() + static_cast<std::ptrdiff_t>(hist)}));
        }
    } else if (const auto* rq = std::get_if<history::RewrittenQuestion>(&ctx)) {
        question = rq->text;
    } else if (const auto* ts = std::get_if<history::TermSet>(&ctx)) {
        if (!ts->terms.empty()) window.push_back(text::join(ts->terms));
    } else if (const auto* pt = std::get_if<history::PerTurnTermSets>(&ctx)) {
        for (std::size_t i = 0; i + 1 < pt->turns.size(); ++i) {
            if (!pt->turns[i].empty()) window.push_back(text::join(pt->turns[i]));
        }
    }
    return {std::move(window), std::move(question)};
}

// Question string handed to the reader under a strategy.
std::string reader_question(ConvContext& cc, Strategy s, std::size_t n) {
    if (s == Strategy::Normy) return cc.rewriter.rewrite(cc.questions, n);
    const auto ctx = context_for(cc, s, n);
    if (const auto* rq = std::get_if<history::RewrittenQuestion>(&ctx)) return rq->text;
    return history::context_text(ctx);
}

retriever::RetrieverConfig retriever_config(const ExperimentConfig& cfg) {
    auto rc = cfg.retriever;
    rc.y = cfg.strategy.y;
    return rc;
}

TurnOutcome run_turn(ConvContext& cc, std::string_view row, std::size_t n, const Passage* gold_passage) {
    const auto& cfg = cc.config;
    TurnOutcome out;
    out.turn = n;
    switch (cfg.module) {
        case Module::Retriever: {
            const auto s = *history::parse_strategy(row);
            if (s == Strategy::Normy) {
                out.ranked = ids_of(retriever::normy_retrieve(cc.index, *cc.scorers.embedder, cc.questions, n,
                                                              retriever_config(cfg), &cc.cache));
            } else {
                const auto ctx = context_for(cc, s, n);
                out.ranked = ids_of(retriever::bm25_retrieve(cc.index, history::query_terms(ctx), cfg.retriever.k, n));
            }
            break;
        }
        case Module::Reranker: {
            const auto s = *history::parse_strategy(row);
            auto candidates = retriever::normy_retrieve(cc.index, *cc.scorers.embedder, cc.questions, n,
                                                        retriever_config(cfg), &cc.cache);
            auto [window, question] = rerank_input(cc, s, n);
            out.ranked = ids_of(reranker::rerank_with(window, question, std::move(candidates), *cc.scorers.relevance));
            break;
        }
        case Module::Reader: {
            const auto s = *history::parse_strategy(row);
            ScoredPassage gold;
            gold.passage = gold_passage;
            gold.doc = *cc.index.find(gold_passage->id);
            gold.origin_turn = n;
            gold.s_rr = 0.0;
            const auto span = reader::answer_with_question(reader_question(cc, s, n), std::span(&gold, 1), cfg.reader,
                                                           *cc.scorers.span);
            out.answer = span.text;
            out.answer_passage = span.passage_id;
            break;
        }
        case Module::Pipeline: {
            std::vector<ScoredPassage> reranked;
            reader::AnswerSpan span;
            if (row == kPipelineFixedWindow) {
                span = fixed_window_pipeline(cc, n, &reranked);
            } else if (row == kPipelineWindowAnswers) {
                const auto ctx = context_for(cc, Strategy::FixedWindowWithAnswers, n);
                auto retrieved = retriever::bm25_retrieve(cc.index, history::query_terms(ctx), cfg.retriever.k, n);
                std::vector<std::string> window;
                const auto lo = n > cfg.strategy.w ? n - cfg.strategy.w : 0;
                for (std::size_t i = lo; i < n; ++i) window.push_back(cc.questions[i] + " " + window_answers(cc)(i));
                reranked = reranker::rerank_with(window, cc.questions[n], std::move(retrieved), *cc.scorers.relevance);
                span = reader::answer_with_question(history::context_text(ctx), reranked, cfg.reader, *cc.scorers.span);
            } else {
                auto rc = retriever_config(cfg);
                if (row == kPipelineNoDecay) rc.use_decay = false;
                if (row == kPipelineNoSim) rc.use_sim = false;
                auto retrieved = retriever::normy_retrieve(cc.index, *cc.scorers.embedder, cc.questions, n, rc, &cc.cache);
                reranked = reranker::rerank(cc.questions, n, std::move(retrieved), cfg.rerank, *cc.scorers.relevance);
                span = reader::answer(cc.questions, n, reranked, cfg.reader, *cc.scorers.span, cc.rewriter);
            }
            out.ranked = ids_of(reranked);
            out.answer = span.text;
            out.answer_passage = span.passage_id;
            break;
        }
    }
    return out;
}

bool needs_answer(Module m) { return m == Module::Reader || m == Module::Pipeline; }

// Turns of a conversation that carry the labels the module is scored on.
std::vector<std::size_t> evaluated_turns(const history::Conversation& conv, const metrics::GoldPassages& gold,
                                         Module m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < conv.turns.size(); ++i) {
        const auto& t = conv.turns[i];
        if (!gold.contains(t.qid)) continue;
        if (needs_answer(m) && !t.gold_answer) continue;
        out.push_back(i);
    }
    return out;
}

struct ConvResult {
    std::vector<TurnOutcome> outcomes;
    std::optional<std::string> error;
};

ConvResult run_conversation(const ExperimentConfig& cfg, const InvertedIndex& index,
                            const history::Conversation& conv, const metrics::GoldPassages& gold,
                            const encoders::Scorers& scorers, retriever::EmbeddingCache& cache,
                            const history::HeuristicRewriter& rewriter, std::string_view row) {
    ConvResult res;
    ConvContext cc{cfg, index, scorers, cache, rewriter, conv.questions(), nullptr};
    try {
        for (const auto n : evaluated_turns(conv, gold, cfg.module)) {
            const auto& pid = gold.at(conv.turns[n].qid);
            const auto doc = index.find(pid);
            if (!doc) throw std::runtime_error("gold passage " + pid + " is not in the index");
            res.outcomes.push_back(run_turn(cc, row, n, &index.passage(*doc)));
        }
    } catch (const std::exception& e) {
        res.error = conv.conv_id + ": " + e.what();
    }
    return res;
}

std::vector<std::string> columns_for(const ExperimentConfig& cfg) {
    std::vector<std::string> cols;
    if (cfg.module != Module::Reader) {
        cols.emplace_back("MRR");
        for (const auto k : cfg.recall_ks) cols.push_back("R@" + std::to_string(k));
    }
    if (needs_answer(cfg.module)) cols.emplace_back("F1");
    return cols;
}

RowReport run_row(const ExperimentConfig& cfg, const InvertedIndex& index,
                  const std::vector<history::Conversation>& convs, const metrics::GoldPassages& gold,
                  const encoders::Scorers& scorers, retriever::EmbeddingCache& cache, const std::string& row) {
    const history::HeuristicRewriter rewriter;
    std::vector<ConvResult> results(convs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < convs.size(); i = next.fetch_add(1)) {
            results[i] = run_conversation(cfg, index, convs[i], gold, scorers, cache, rewriter, row);
        }
    };
    const auto jobs = std::min(cfg.jobs, std::max<std::size_t>(convs.size(), 1));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    RowReport report;
    report.name = row;
    std::vector<metrics::ModuleResult> ranked;
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < convs.size(); ++c) {
        if (results[c].error) {
            report.error = results[c].error;
            report.predictions.clear();
            return report;
        }
        for (const auto& o : results[c].outcomes) {
            const auto& turn = convs[c].turns[o.turn];
            ranked.push_back({convs[c].conv_id, turn.qid, o.ranked, o.answer});
            if (o.answer) {
                const double f1 = metrics::token_f1(*o.answer, turn.gold_answer->text);
                f1_sum += f1;
                if (cfg.module == Module::Pipeline) {
                    report.predictions.push_back({convs[c].conv_id, turn.qid, o.turn, o.answer_passage, *o.answer, f1});
                }
            }
        }
    }
    report.questions = ranked.size();
    if (cfg.module != Module::Reader) {
        report.metrics.emplace_back("MRR", metrics::mrr(ranked, gold));
        for (const auto k : cfg.recall_ks) {
            report.metrics.emplace_back("R@" + std::to_string(k), metrics::recall_at_k(ranked, gold, k));
        }
    }
    if (needs_answer(cfg.module)) {
        report.metrics.emplace_back("F1", ranked.empty() ? 0.0 : f1_sum / static_cast<double>(ranked.size()));
    }
    return report;
}

}  // namespace

std::vector<ScoredPassage> retrieve_turn(const ExperimentConfig& config, const InvertedIndex& index,
                                        const encoders::Scorers& scorers, std::span<const std::string> questions,
                                        std::size_t n, std::string_view strategy) {
    const auto s = history::parse_strategy(strategy);
    if (!s) throw std::invalid_argument("unknown retriever strategy '" + std::string(strategy) + "'");
    if (n >= questions.size()) throw std::out_of_range("turn " + std::to_string(n) + " out of range");
    retriever::EmbeddingCache cache(*scorers.embedder);
    const history::HeuristicRewriter rewriter;
    ConvContext cc{config, index, scorers, cache, rewriter, {questions.begin(), questions.end()}, nullptr};
    if (*s == Strategy::Normy) {
        return retriever::normy_retrieve(index, *scorers.embedder, cc.questions, n, retriever_config(config), &cache);
    }
    return retriever::bm25_retrieve(index, history::query_terms(context_for(cc, *s, n)), config.retriever.k, n);
}

std::string_view module_name(Module m) {
    switch (m) {
        case Module::Retriever: return "retriever";
        case Module::Reranker: return "reranker";
        case Module::Reader: return "reader";
        case Module::Pipeline: return "pipeline";
    }
    return "retriever";
}

std::optional<Module> parse_module(std::string_view name) {
    for (const auto m : {Module::Retriever, Module::Reranker, Module::Reader, Module::Pipeline}) {
        if (module_name(m) == name) return m;
    }
    return std::nullopt;
}

std::vector<std::string> default_rows(Module m) {
    switch (m) {
        case Module::Retriever:
            return {"no-history", "first-last", "full-history", "fixed-window", "backtracking", "rewriting", "normy"};
        case Module::Reranker:
        case Module::Reader:
            return {"no-history", "first-last", "full-history", "fixed-window", "backtracking", "rewriting", "yake"};
        case Module::Pipeline:
            return {std::begin(kPipelineRows), std::end(kPipelineRows)};
    }
    return {};
}

std::vector<std::string> ExperimentConfig::effective_rows() const { return rows.empty() ? default_rows(module) : rows; }

void ExperimentConfig::validate() const {
    strategy.validate();
    retriever.validate();
    rerank.validate();
    reader.validate();
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    if (recall_ks.empty()) throw std::invalid_argument("k list must not be empty");
    for (const auto k : recall_ks) {
        if (k < 1) throw std::invalid_argument("every k must be >= 1");
    }
    const auto grid = effective_rows();
    if (grid.empty()) throw std::invalid_argument("strategy grid must not be empty");
    for (const auto& r : grid) {
        const bool ok = module == Module::Pipeline ? is_pipeline_row(r) : history::parse_strategy(r).has_value();
        if (!ok) {
            throw std::invalid_argument("unknown " + std::string(module_name(module)) + " row '" + r + "'");
        }
    }
}

std::optional<double> RowReport::metric(std::string_view column) const {
    for (const auto& [name, value] : metrics) {
        if (name == column) return value;
    }
    return std::nullopt;
}

const RowReport* Report::row(std::string_view name) const {
    for (const auto& r : rows) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

Report run_experiment(const ExperimentConfig& config, const InvertedIndex& index,
                      const std::vector<history::Conversation>& conversations, const metrics::GoldPassages& gold,
                      const encoders::Scorers& scorers) {
    config.validate();
    Report report;
    report.module = config.module;
    report.columns = columns_for(config);
    retriever::EmbeddingCache cache(*scorers.embedder);
    for (const auto& row : config.effective_rows()) {
        report.rows.push_back(run_row(config, index, conversations, gold, scorers, cache, row));
    }
    return report;
}

std::string to_jsonl(const Report& report) {
    std::ostringstream out;
    for (const auto& row : report.rows) {
        nlohmann::ordered_json j;
        j["type"] = "row";
        j["module"] = module_name(report.module);
        j["row"] = row.name;
        j["questions"] = row.questions;
        nlohmann::ordered_json m = nlohmann::ordered_json::object();
        for (const auto& [name, value] : row.metrics) m[name] = value;
        j["metrics"] = m;
        j["error"] = row.error ? nlohmann::ordered_json(*row.error) : nlohmann::ordered_json(nullptr);
        out << j.dump() << '\n';
    }
    for (const auto& row : report.rows) {
        for (const auto& p : row.predictions) {
            nlohmann::ordered_json j;
            j["type"] = "prediction";
            j["row"] = row.name;
            j["conv_id"] = p.conv_id;
            j["qid"] = p.qid;
            j["turn"] = p.turn;
            j["passage_id"] = p.passage_id;
            j["answer"] = p.answer;
            j["f1"] = p.f1;
            out << j.dump() << '\n';
        }
    }
    return out.str();
}

std::string render_table(const Report& report) {
    std::size_t name_w = 7;
    for (const auto& r : report.rows) name_w = std::max(name_w, r.name.size());
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_w), "Setting");
    out << buf;
    for (const auto& c : report.columns) {
        std::snprintf(buf, sizeof buf, "  %8s", c.c_str());
        out << buf;
    }
    out << '\n';
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_w), r.name.c_str());
        out << buf;
        if (r.error) {
            out << "  error: " << *r.error << '\n';
            continue;
        }
        for (const auto& c : report.columns) {
            const auto v = r.metric(c);
            if (v) {
                std::snprintf(buf, sizeof buf, "  %8.4f", *v);
            } else {
                std::snprintf(buf, sizeof buf, "  %8s", "-");
            }
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace normy::experiment
