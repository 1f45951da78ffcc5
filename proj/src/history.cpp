#include "normy/history.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "normy/keyphrase.hpp"
#include "normy/text.hpp"

namespace normy::history {

namespace {

constexpr std::array<std::string_view, 16> kAnaphors = {
    "he", "she", "it", "they", "him", "her", "them", "his",
    "hers", "its", "their", "this", "that", "these", "those", "one",
};
constexpr std::array<std::string_view, 4> kPossessives = {"his", "hers", "its", "their"};

bool is_anaphor(std::string_view w) {
    return std::find(kAnaphors.begin(), kAnaphors.end(), w) != kAnaphors.end();
}

bool is_possessive(std::string_view w) {
    return std::find(kPossessives.begin(), kPossessives.end(), w) != kPossessives.end();
}

// "her" directly followed by a content word in the same clause reads as a determiner.
bool precedes_noun(std::string_view q, const std::vector<text::Word>& words, const text::Word& w) {
    const auto it = std::find_if(words.begin(), words.end(), [&](const text::Word& x) { return x.offset > w.offset; });
    if (it == words.end() || text::is_stopword(it->norm)) return false;
    const auto gap = q.substr(w.offset + w.raw.size(), it->offset - w.offset - w.raw.size());
    return gap.find_first_not_of(" \t") == std::string_view::npos;
}

// Last maximal run of capitalized content words, as written in the source.
std::optional<std::string> last_capitalized_run(const std::string& question) {
    const auto words = text::split_words(question);
    std::optional<std::string> last;
    std::size_t i = 0;
    while (i < words.size()) {
        auto eligible = [&](std::size_t k) {
            return words[k].capitalized && !text::is_stopword(words[k].norm) && !is_anaphor(words[k].norm);
        };
        if (!eligible(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < words.size() && eligible(j + 1) && words[j + 1].sentence == words[j].sentence) {
            const auto gap_begin = words[j].offset + words[j].raw.size();
            const auto gap = std::string_view(question).substr(gap_begin, words[j + 1].offset - gap_begin);
            if (gap.find_first_not_of(" \t") != std::string_view::npos) break;
            ++j;
        }
        const auto begin = words[i].offset;
        const auto end = words[j].offset + words[j].raw.size();
        last = question.substr(begin, end - begin);
        i = j + 1;
    }
    return last;
}

std::vector<std::string> tokens_of(const std::string& s) { return text::tokenize(s); }

TokenSequence sequence_of_turns(std::span<const std::string> questions, const std::vector<std::size_t>& turns) {
    std::vector<std::vector<std::string>> parts;
    for (auto i : turns) parts.push_back(tokens_of(questions[i]));
    return prune_turns(parts);
}

std::vector<std::size_t> range(std::size_t lo, std::size_t hi_inclusive) {
    std::vector<std::size_t> out;
    for (std::size_t i = lo; i <= hi_inclusive; ++i) out.push_back(i);
    return out;
}

}  // namespace

std::vector<std::string> Conversation::questions() const {
    std::vector<std::string> out;
    out.reserve(turns.size());
    for (const auto& t : turns) out.push_back(t.question);
    return out;
}

std::vector<Conversation> load_conversations(std::istream& in) {
    std::vector<Conversation> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Conversation conv;
            conv.conv_id = j.at("conv_id").get<std::string>();
            std::set<std::string> qids;
            for (const auto& t : j.at("turns")) {
                Turn turn;
                turn.qid = t.at("qid").get<std::string>();
                turn.question = t.at("question").get<std::string>();
                if (turn.question.empty()) throw std::runtime_error("empty question in " + turn.qid);
                if (t.contains("gold_passage_id") && !t["gold_passage_id"].is_null()) {
                    turn.gold_passage_id = t["gold_passage_id"].get<std::string>();
                }
                if (t.contains("gold_answer") && !t["gold_answer"].is_null()) {
                    const auto& a = t["gold_answer"];
                    turn.gold_answer = GoldAnswer{a.at("text").get<std::string>(), a.at("passage_id").get<std::string>()};
                }
                if (!qids.insert(turn.qid).second) throw std::runtime_error("duplicate qid " + turn.qid);
                conv.turns.push_back(std::move(turn));
            }
            if (conv.turns.empty()) throw std::runtime_error("conversation has no turns");
            out.push_back(std::move(conv));
        } catch (const std::exception& e) {
            throw std::runtime_error("conversations line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Conversation> load_conversations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_conversations(in);
}

std::string conversation_to_json(const Conversation& conv) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& t : conv.turns) {
        nlohmann::json jt = {{"qid", t.qid}, {"question", t.question}};
        if (t.gold_passage_id) jt["gold_passage_id"] = *t.gold_passage_id;
        if (t.gold_answer) jt["gold_answer"] = {{"text", t.gold_answer->text}, {"passage_id", t.gold_answer->passage_id}};
        turns.push_back(std::move(jt));
    }
    return nlohmann::json{{"conv_id", conv.conv_id}, {"turns", turns}}.dump();
}

std::vector<std::string> query_terms(const QueryContext& ctx) {
    return std::visit(
        [](const auto& c) -> std::vector<std::string> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, TermSet>) {
                return c.terms;
            } else if constexpr (std::is_same_v<T, TokenSequence>) {
                return text::content_terms(c.tokens);
            } else if constexpr (std::is_same_v<T, RewrittenQuestion>) {
                return text::index_terms(c.text);
            } else {
                std::vector<std::string> out;
                for (const auto& turn : c.turns) out.insert(out.end(), turn.begin(), turn.end());
                return out;
            }
        },
        ctx);
}

std::string context_text(const QueryContext& ctx) {
    return std::visit(
        [](const auto& c) -> std::string {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, TermSet>) {
                return text::join(c.terms);
            } else if constexpr (std::is_same_v<T, TokenSequence>) {
                return text::join(c.tokens);
            } else if constexpr (std::is_same_v<T, RewrittenQuestion>) {
                return c.text;
            } else {
                std::vector<std::string> parts;
                for (const auto& turn : c.turns) parts.push_back(text::join(turn));
                return text::join(parts);
            }
        },
        ctx);
}

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::NoHistory: return "no-history";
        case Strategy::FirstLast: return "first-last";
        case Strategy::FullHistory: return "full-history";
        case Strategy::FixedWindow: return "fixed-window";
        case Strategy::FixedWindowWithAnswers: return "fixed-window-answers";
        case Strategy::Backtracking: return "backtracking";
        case Strategy::Rewriting: return "rewriting";
        case Strategy::Yake: return "yake";
        case Strategy::Normy: return "normy";
    }
    return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    for (auto s : {Strategy::NoHistory, Strategy::FirstLast, Strategy::FullHistory, Strategy::FixedWindow,
                   Strategy::FixedWindowWithAnswers, Strategy::Backtracking, Strategy::Rewriting, Strategy::Yake,
                   Strategy::Normy}) {
        if (strategy_name(s) == name) return s;
    }
    return std::nullopt;
}

void StrategyConfig::validate() const {
    if (w < 1) throw std::invalid_argument("window size w must be >= 1");
    if (y < 1) throw std::invalid_argument("keyphrases per turn y must be >= 1");
    if (!(backtrack_threshold >= 0.0 && backtrack_threshold <= 1.0)) {
        throw std::invalid_argument("backtrack threshold must be in [0, 1]");
    }
}

std::string HeuristicRewriter::rewrite(std::span<const std::string> questions, std::size_t n) const {
    return rewrite_question(questions, n);
}

std::string rewrite_question(std::span<const std::string> questions, std::size_t n) {
    if (n >= questions.size()) throw std::out_of_range("rewrite_question: turn index out of range");
    const std::string& q = questions[n];
    const auto words = text::split_words(q);
    std::vector<const text::Word*> anaphors;
    for (const auto& w : words) {
        if (is_anaphor(w.norm)) anaphors.push_back(&w);
    }
    if (anaphors.empty()) return q;

    std::optional<std::string> antecedent;
    for (std::size_t j = n; j-- > 0;) {
        antecedent = last_capitalized_run(questions[j]);
        if (antecedent) break;
    }
    if (!antecedent) return q;

    std::string out;
    std::size_t pos = 0;
    for (const auto* w : anaphors) {
        out.append(q, pos, w->offset - pos);
        out += *antecedent;
        if (is_possessive(w->norm) || (w->norm == "her" && precedes_noun(q, words, *w))) out += "\xE2\x80\x99s";  // ’s
        pos = w->offset + w->raw.size();
    }
    out.append(q, pos, std::string::npos);
    return out;
}

std::string MemoizedAnswers::operator()(std::size_t turn) {
    auto it = cache_.find(turn);
    if (it != cache_.end()) return it->second;
    auto answer = compute_(turn);
    cache_.emplace(turn, answer);
    return answer;
}

TokenSequence prune_turns(const std::vector<std::vector<std::string>>& turns, std::size_t cap) {
    std::vector<std::string> all;
    for (const auto& t : turns) all.insert(all.end(), t.begin(), t.end());
    TokenSequence seq;
    const std::size_t drop = all.size() > cap ? all.size() - cap : 0;
    seq.tokens.assign(all.begin() + static_cast<std::ptrdiff_t>(drop), all.end());
    seq.question_tokens = turns.empty() ? 0 : std::min(turns.back().size(), seq.tokens.size());
    return seq;
}

QueryContext model_history(const StrategyConfig& config, std::span<const std::string> questions, std::size_t n,
                           const HistoryDeps& deps) {
    config.validate();
    if (n >= questions.size()) throw std::out_of_range("model_history: turn index out of range");

    switch (config.strategy) {
        case Strategy::NoHistory:
            return sequence_of_turns(questions, {n});
        case Strategy::FirstLast:
            if (n == 0) return sequence_of_turns(questions, {0});
            if (n == 1) return sequence_of_turns(questions, {0, 1});
            return sequence_of_turns(questions, {0, n - 1, n});
        case Strategy::FullHistory:
            return sequence_of_turns(questions, range(0, n));
        case Strategy::FixedWindow:
            return sequence_of_turns(questions, range(n > config.w ? n - config.w : 0, n));
        case Strategy::FixedWindowWithAnswers: {
            if (!deps.answers) throw std::invalid_argument("fixed-window-answers requires an answer provider");
            std::vector<std::vector<std::string>> parts;
            for (std::size_t i = n > config.w ? n - config.w : 0; i < n; ++i) {
                auto turn = tokens_of(questions[i]);
                auto answer = tokens_of(deps.answers(i));
                turn.insert(turn.end(), answer.begin(), answer.end());
                parts.push_back(std::move(turn));
            }
            parts.push_back(tokens_of(questions[n]));
            return prune_turns(parts);
        }
        case Strategy::Backtracking: {
            if (!deps.embedder) throw std::invalid_argument("backtracking requires an embedder");
            std::vector<std::size_t> selected;
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<std::string> target;
                for (auto s : selected) target.push_back(questions[s]);
                target.push_back(questions[n]);
                const auto sim = encoders::cosine_sim(deps.embedder->embed(questions[i]),
                                                      deps.embedder->embed(text::join(target)));
                if (sim > config.backtrack_threshold) selected.push_back(i);
            }
            selected.push_back(n);
            return sequence_of_turns(questions, selected);
        }
        case Strategy::Rewriting: {
            const HeuristicRewriter fallback;
            const QuestionRewriter& rw = deps.rewriter ? *deps.rewriter : fallback;
            return RewrittenQuestion{rw.rewrite(questions, n)};
        }
        case Strategy::Yake: {
            TermSet set;
            for (std::size_t i = 0; i < n; ++i) {
                auto terms = keyphrase::turn_terms(questions[i], config.y);
                set.terms.insert(set.terms.end(), terms.begin(), terms.end());
            }
            auto last = text::index_terms(questions[n]);
            set.terms.insert(set.terms.end(), last.begin(), last.end());
            return set;
        }
        case Strategy::Normy: {
            PerTurnTermSets per_turn;
            for (std::size_t i = 0; i <= n; ++i) per_turn.turns.push_back(keyphrase::turn_terms(questions[i], config.y));
            return per_turn;
        }
    }
    throw std::logic_error("unhandled strategy");
}

}  // namespace normy::history
