#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "normy/config.hpp"
#include "normy/dataset.hpp"
#include "normy/experiment.hpp"
#include "normy/keyphrase.hpp"
#include "normy/minigen.hpp"
#include "normy/serve_check.hpp"

namespace normy::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void log(std::ostream& err, std::string_view cmd, std::string_view msg, json fields = json::object()) {
    json line;
    line["level"] = "info";
    line["cmd"] = cmd;
    line["msg"] = msg;
    for (auto it = fields.begin(); it != fields.end(); ++it) line[it.key()] = it.value();
    err << line.dump() << "\n";
}

// Options shared by every subcommand that reads configuration.
struct ConfigFlags {
    std::string path;
    std::vector<std::string> sets;
    std::string scorer;
    std::deque<std::pair<CLI::Option*, std::string>> keyed;  // option -> config key
    std::deque<std::string> values;

    void attach(CLI::App* sub, bool with_scorer = true) {
        sub->add_option("--config", path, "Config file of `key = value` lines")->check(CLI::ExistingFile);
        sub->add_option("--set", sets, "Override one config key, e.g. --set retriever.lambda=0.2");
        if (with_scorer) sub->add_option("--scorer", scorer, "builtin, or the URL of a scorer sidecar");
    }

    void key_flag(CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        auto& v = values.emplace_back();
        keyed.emplace_back(sub->add_option(flag, v, help + " (" + key + ")"), key);
    }

    config::AppConfig load() const {
        config::AppConfig cfg;
        if (!path.empty()) cfg.apply_file(path);
        try {
            if (const char* env = std::getenv(kEndpointEnv); env != nullptr && *env != '\0') {
                cfg.set("scorer.endpoint", env);
            }
            if (!scorer.empty()) cfg.set("scorer.endpoint", scorer);
            for (std::size_t i = 0; i < keyed.size(); ++i) {
                if (keyed[i].first->count() > 0) cfg.set(keyed[i].second, values[i]);
            }
            for (const auto& s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
                cfg.set(s.substr(0, eq), s.substr(eq + 1));
            }
            cfg.retriever.y = cfg.strategy.y;
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }
};

// Conversation input for the per-turn debugging subcommands.
struct TurnInput {
    std::string index_path;
    std::string conversations;
    std::string conv_id;
    std::vector<std::string> questions;
    long turn = -1;

    void attach(CLI::App* sub) {
        sub->add_option("--index", index_path, "Index file written by `index`")->required()->check(CLI::ExistingFile);
        auto* convs = sub->add_option("--conversations", conversations, "Conversation JSONL")
                          ->check(CLI::ExistingFile);
        sub->add_option("--conv", conv_id, "Conversation id (default: the first)")->needs(convs);
        auto* qs = sub->add_option("--question", questions, "A turn's question; repeat in order");
        convs->excludes(qs);
        sub->add_option("--turn", turn, "Turn index (default: the last)");
    }

    struct Resolved {
        std::string conv_id;
        std::string qid;
        std::vector<std::string> questions;
        std::size_t n = 0;
    };

    Resolved resolve() const {
        Resolved r;
        if (!conversations.empty()) {
            const auto convs = history::load_conversations_file(conversations);
            const history::Conversation* found = nullptr;
            for (const auto& c : convs) {
                if (conv_id.empty() || c.conv_id == conv_id) {
                    found = &c;
                    break;
                }
            }
            if (found == nullptr) {
                throw std::invalid_argument(conv_id.empty() ? "no conversations in " + conversations
                                                            : "no conversation '" + conv_id + "'");
            }
            r.conv_id = found->conv_id;
            r.questions = found->questions();
            r.n = turn < 0 ? r.questions.size() - 1 : static_cast<std::size_t>(turn);
            if (r.n < found->turns.size()) r.qid = found->turns[r.n].qid;
        } else {
            if (questions.empty()) throw UsageError("give --conversations or at least one --question");
            r.questions = questions;
            r.n = turn < 0 ? r.questions.size() - 1 : static_cast<std::size_t>(turn);
        }
        if (r.questions.empty() || r.n >= r.questions.size()) {
            throw std::out_of_range("turn " + std::to_string(turn) + " out of range");
        }
        return r;
    }
};

json passage_json(const retriever::ScoredPassage& p, std::size_t rank) {
    json o;
    o["rank"] = rank;
    o["id"] = p.id();
    o["s_rt"] = p.s_rt;
    o["bm25"] = p.bm25;
    o["origin_turn"] = p.origin_turn;
    o["sim_factor"] = p.sim_factor;
    if (p.s_rr) o["s_rr"] = *p.s_rr;
    return o;
}

json turn_header(const TurnInput::Resolved& r) {
    json o;
    if (!r.conv_id.empty()) o["conv_id"] = r.conv_id;
    if (!r.qid.empty()) o["qid"] = r.qid;
    o["turn"] = r.n;
    return o;
}

experiment::ExperimentConfig experiment_config(const config::AppConfig& cfg) {
    experiment::ExperimentConfig ec;
    ec.strategy = cfg.strategy;
    ec.retriever = cfg.retriever;
    ec.rerank = cfg.rerank;
    ec.reader = cfg.reader;
    ec.jobs = cfg.jobs;
    return ec;
}

void write_output(const std::string& path, const std::string& data, std::ostream& out) {
    if (path.empty()) {
        out << data;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << data;
    if (!f.flush()) throw std::runtime_error("cannot write " + path);
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const encoders::RemoteError*>(&e)) return "remote";
    if (dynamic_cast<const IndexFormatError*>(&e)) return "index_format";
    if (dynamic_cast<const DuplicateIdError*>(&e)) return "duplicate_id";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    if (dynamic_cast<const std::out_of_range*>(&e)) return "out_of_range";
    return "runtime";
}

const CLI::App* deepest(const CLI::App& app) {
    const CLI::App* cur = &app;
    for (;;) {
        const auto subs = cur->get_subcommands();
        if (subs.empty()) return cur;
        cur = subs.front();
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conversational open-retrieval question answering toolkit", "normy"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    // index
    auto* index_cmd = app.add_subcommand("index", "Build a BM25 index from a corpus JSONL file");
    std::string corpus_path, index_out;
    std::size_t chunk = 384;
    ConfigFlags index_cfg;
    index_cmd->add_option("--corpus", corpus_path, "Corpus JSONL: {id, title, text} per line")
        ->required()
        ->check(CLI::ExistingFile);
    index_cmd->add_option("--out", index_out, "Index file to write")->required();
    index_cmd->add_option("--chunk", chunk, "Words per passage; 0 keeps one passage per document")
        ->capture_default_str();
    index_cfg.attach(index_cmd, false);

    // keyphrase
    auto* kp_cmd = app.add_subcommand("keyphrase", "Score keyphrases of a text");
    std::string kp_text;
    std::size_t kp_y = 5;
    bool kp_features = false;
    kp_cmd->add_option("text", kp_text, "Input text")->required();
    kp_cmd->add_option("--y", kp_y, "Number of keyphrases")->capture_default_str()->check(CLI::PositiveNumber);
    kp_cmd->add_flag("--features", kp_features, "Include per-word features");

    // retrieve / rerank / answer
    struct TurnCommand {
        CLI::App* app;
        TurnInput input;
        ConfigFlags cfg;
        std::string strategy = "normy";
    };
    std::deque<TurnCommand> turn_cmds;
    const auto add_turn_cmd = [&](const std::string& name, const std::string& help) -> TurnCommand& {
        auto& tc = turn_cmds.emplace_back();
        tc.app = app.add_subcommand(name, help);
        tc.input.attach(tc.app);
        tc.cfg.attach(tc.app);
        tc.cfg.key_flag(tc.app, "--k", "retriever.k", "Passages to retrieve");
        tc.cfg.key_flag(tc.app, "--lambda", "retriever.lambda", "Decay per turn of age");
        tc.cfg.key_flag(tc.app, "--w", "strategy.w", "History window");
        tc.cfg.key_flag(tc.app, "--y", "strategy.y", "Keywords per turn");
        tc.app->add_option("--strategy", tc.strategy, "History strategy for retrieval")->capture_default_str();
        return tc;
    };
    auto& retrieve_cmd = add_turn_cmd("retrieve", "Rank passages for one turn");
    auto& rerank_cmd = add_turn_cmd("rerank", "Retrieve, then rerank with the window of recent turns");
    auto& answer_cmd = add_turn_cmd("answer", "Retrieve, rerank and extract an answer span");
    answer_cmd.cfg.key_flag(answer_cmd.app, "--max-span", "reader.max_span_len", "Longest answer span");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Run an experiment grid and report metrics");
    std::string eval_index, eval_convs, eval_module = "retriever", eval_out, eval_format = "jsonl";
    std::vector<std::string> eval_rows;
    std::vector<std::size_t> eval_ks;
    ConfigFlags eval_cfg;
    eval_cmd->add_option("--index", eval_index, "Index file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--conversations", eval_convs, "Conversation JSONL with gold labels")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--module", eval_module, "Module under test")
        ->check(CLI::IsMember({"retriever", "reranker", "reader", "pipeline"}))
        ->capture_default_str();
    eval_cmd->add_option("--strategies", eval_rows, "Comma-separated rows (default: the module's grid)")
        ->delimiter(',');
    eval_cmd->add_option("--k", eval_ks, "Comma-separated recall cutoffs (default 1,5,10)")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--out", eval_out, "Report file (default: stdout)");
    eval_cmd->add_option("--format", eval_format, "Report format")
        ->check(CLI::IsMember({"jsonl", "table"}))
        ->capture_default_str();
    eval_cfg.attach(eval_cmd);
    eval_cfg.key_flag(eval_cmd, "--jobs", "eval.jobs", "Conversations processed in parallel");
    eval_cfg.key_flag(eval_cmd, "--lambda", "retriever.lambda", "Decay per turn of age");
    eval_cfg.key_flag(eval_cmd, "--w", "strategy.w", "History window");
    eval_cfg.key_flag(eval_cmd, "--y", "strategy.y", "Keywords per turn");

    // serve-check
    auto* sc_cmd = app.add_subcommand("serve-check", "Probe a scorer sidecar against the wire contract");
    std::string sc_endpoint;
    std::size_t sc_timeout_ms = 30000;
    sc_cmd->add_option("--endpoint", sc_endpoint, std::string("Sidecar URL (default: $") + kEndpointEnv + ")");
    sc_cmd->add_option("--timeout-ms", sc_timeout_ms, "Per-request timeout")->capture_default_str();

    // gen-mini
    auto* gen_cmd = app.add_subcommand("gen-mini", "Write the synthetic mini collection");
    std::string gen_corpus, gen_convs;
    minigen::MiniConfig mini;
    gen_cmd->add_option("--corpus-out", gen_corpus, "Corpus JSONL to write")->required();
    gen_cmd->add_option("--conversations-out", gen_convs, "Conversation JSONL to write")->required();
    gen_cmd->add_option("--seed", mini.seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--entities", mini.entities, "Entities")->capture_default_str();
    gen_cmd->add_option("--conversations", mini.conversations, "Conversations")->capture_default_str();

    // config
    auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");
    ConfigFlags show_cfg;
    show_cfg.attach(config_cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n\n" << deepest(app)->help();
        return 2;
    }

    const auto started = std::chrono::steady_clock::now();
    const auto elapsed_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
            .count();
    };
    std::string cmd = "normy";
    try {
        if (index_cmd->parsed()) {
            cmd = "index";
            const auto cfg = index_cfg.load();
            const auto docs = dataset::load_documents_file(corpus_path);
            auto passages = chunk == 0 ? dataset::as_passages(docs) : dataset::chunk_documents(docs, chunk);
            const auto index = InvertedIndex::build(std::move(passages), cfg.bm25);
            index.save_file(index_out);
            json o;
            o["documents"] = docs.size();
            o["passages"] = index.size();
            o["terms"] = index.term_count();
            o["avgdl"] = index.avgdl();
            o["out"] = index_out;
            out << o.dump() << "\n";
            log(err, cmd, "index written", {{"passages", index.size()}, {"elapsed_ms", elapsed_ms()}});
            return 0;
        }

        if (kp_cmd->parsed()) {
            cmd = "keyphrase";
            json o;
            o["keyphrases"] = json::array();
            for (const auto& k : keyphrase::extract_keyphrases(kp_text, kp_y)) {
                o["keyphrases"].push_back({{"phrase", k.phrase}, {"score", k.score}});
            }
            o["keywords"] = keyphrase::top_keywords(kp_text, kp_y);
            if (kp_features) {
                o["features"] = json::array();
                for (const auto& [term, s] : keyphrase::word_features(kp_text)) {
                    o["features"].push_back({{"term", term},
                                             {"tf", s.tf},
                                             {"w_case", s.w_case},
                                             {"w_pos", s.w_pos},
                                             {"w_freq", s.w_freq},
                                             {"w_rel", s.w_rel},
                                             {"w_difs", s.w_difs},
                                             {"score", s.score}});
                }
            }
            out << o.dump() << "\n";
            return 0;
        }

        for (auto& tc : turn_cmds) {
            if (!tc.app->parsed()) continue;
            cmd = tc.app->get_name();
            const auto cfg = tc.cfg.load();
            if (!history::parse_strategy(tc.strategy)) throw UsageError("unknown strategy '" + tc.strategy + "'");
            const auto turn = tc.input.resolve();
            const auto index = InvertedIndex::load_file(tc.input.index_path);
            const auto scorers = encoders::make_scorers(cfg.scorer);
            const auto ec = experiment_config(cfg);
            auto ranked =
                experiment::retrieve_turn(ec, index, scorers, turn.questions, turn.n, tc.strategy);
            if (&tc != &retrieve_cmd) {
                ranked = reranker::rerank(turn.questions, turn.n, std::move(ranked), cfg.rerank,
                                          *scorers.relevance);
            }
            json o = turn_header(turn);
            o["strategy"] = tc.strategy;
            if (&tc == &answer_cmd) {
                if (ranked.empty()) throw std::runtime_error("no passages retrieved");
                const history::HeuristicRewriter rewriter;
                const auto span =
                    reader::answer(turn.questions, turn.n, ranked, cfg.reader, *scorers.span, rewriter);
                o["question"] = rewriter.rewrite(turn.questions, turn.n);
                o["passage_id"] = span.passage_id;
                o["text"] = span.text;
                o["start"] = span.start;
                o["end"] = span.end;
                o["scores"] = {{"s_rt", span.s_rt}, {"s_rr", span.s_rr}, {"s_rd", span.s_rd},
                               {"combined", span.combined}};
            } else {
                o["passages"] = json::array();
                for (std::size_t i = 0; i < ranked.size(); ++i) o["passages"].push_back(passage_json(ranked[i], i + 1));
            }
            out << o.dump() << "\n";
            log(err, cmd, "done", {{"elapsed_ms", elapsed_ms()}});
            return 0;
        }

        if (eval_cmd->parsed()) {
            cmd = "eval";
            const auto cfg = eval_cfg.load();
            auto ec = experiment_config(cfg);
            ec.module = *experiment::parse_module(eval_module);
            ec.rows = eval_rows;
            if (!eval_ks.empty()) ec.recall_ks = eval_ks;
            try {
                ec.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto index = InvertedIndex::load_file(eval_index);
            const auto convs = history::load_conversations_file(eval_convs);
            const auto gold = dataset::resolve_gold(index, convs);
            const auto scorers = encoders::make_scorers(cfg.scorer);
            log(err, cmd, "start",
                {{"module", eval_module}, {"conversations", convs.size()}, {"gold_turns", gold.size()},
                 {"jobs", ec.jobs}});
            const auto report = experiment::run_experiment(ec, index, convs, gold, scorers);
            write_output(eval_out,
                         eval_format == "table" ? experiment::render_table(report) : experiment::to_jsonl(report),
                         out);
            std::size_t failed = 0;
            for (const auto& row : report.rows) {
                if (row.error) {
                    ++failed;
                    log(err, cmd, "row failed", {{"row", row.name}, {"error", *row.error}});
                }
            }
            log(err, cmd, "done", {{"rows", report.rows.size()}, {"failed_rows", failed}, {"elapsed_ms", elapsed_ms()}});
            return 0;
        }

        if (sc_cmd->parsed()) {
            cmd = "serve-check";
            std::string endpoint = sc_endpoint;
            if (endpoint.empty()) {
                if (const char* env = std::getenv(kEndpointEnv); env != nullptr) endpoint = env;
            }
            if (endpoint.empty()) throw UsageError(std::string("give --endpoint or set ") + kEndpointEnv);
            const auto report = serve_check::run(endpoint, std::chrono::milliseconds(sc_timeout_ms));
            out << report.to_json() << "\n";
            if (!report.ok()) {
                std::size_t failed = 0;
                for (const auto& p : report.probes) failed += p.ok ? 0 : 1;
                json e;
                e["error"] = std::to_string(failed) + " of " + std::to_string(report.probes.size()) +
                             " contract probes failed";
                e["kind"] = "contract";
                e["cmd"] = cmd;
                err << e.dump() << "\n";
                return 1;
            }
            return 0;
        }

        if (gen_cmd->parsed()) {
            cmd = "gen-mini";
            try {
                mini.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto data = minigen::generate(mini);
            std::string docs, convs;
            for (const auto& d : data.documents) docs += dataset::document_to_json(d) + "\n";
            for (const auto& c : data.conversations) convs += history::conversation_to_json(c) + "\n";
            write_output(gen_corpus, docs, out);
            write_output(gen_convs, convs, out);
            log(err, cmd, "written",
                {{"documents", data.documents.size()}, {"conversations", data.conversations.size()}});
            return 0;
        }

        if (config_cmd->parsed()) {
            cmd = "config";
            out << show_cfg.load().to_text();
            return 0;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << deepest(app)->help();
        return 2;
    } catch (const std::exception& e) {
        json o;
        o["error"] = e.what();
        o["kind"] = error_kind(e);
        o["cmd"] = cmd;
        err << o.dump() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace normy::cli
