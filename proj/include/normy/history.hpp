#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "normy/encoders.hpp"

namespace normy::history {

struct GoldAnswer {
    std::string text;
    std::string passage_id;
};

struct Turn {
    std::string qid;
    std::string question;
    std::optional<std::string> gold_passage_id;  // evaluation only
    std::optional<GoldAnswer> gold_answer;       // evaluation only
};

struct Conversation {
    std::string conv_id;
    std::vector<Turn> turns;

    /// The gold-free view handed to history strategies.
    std::vector<std::string> questions() const;
};

/// One conversation per line:
/// {"conv_id": str, "turns": [{"qid", "question", "gold_passage_id"?, "gold_answer"?}]}
/// Throws std::runtime_error naming the line on malformed input.
std::vector<Conversation> load_conversations(std::istream& in);
std::vector<Conversation> load_conversations_file(const std::string& path);
std::string conversation_to_json(const Conversation& conv);

inline constexpr std::size_t kMaxContextTokens = 384;

struct TermSet {
    std::vector<std::string> terms;  // multiset
};
struct TokenSequence {
    std::vector<std::string> tokens;  // full-stream tokens, at most kMaxContextTokens
    std::size_t question_tokens = 0;  // length of the trailing q_n suffix
};
struct RewrittenQuestion {
    std::string text;
};
struct PerTurnTermSets {
    std::vector<std::vector<std::string>> turns;  // R(q_0) .. R(q_n)
};

using QueryContext = std::variant<TermSet, TokenSequence, RewrittenQuestion, PerTurnTermSets>;

/// BM25 query terms for a context (stopwords removed; per-turn sets
/// flattened as a multiset union).
std::vector<std::string> query_terms(const QueryContext& ctx);
/// Plain-text rendering for text-consuming scorers.
std::string context_text(const QueryContext& ctx);

enum class Strategy {
    NoHistory,
    FirstLast,
    FullHistory,
    FixedWindow,
    FixedWindowWithAnswers,
    Backtracking,
    Rewriting,
    Yake,
    Normy,
};

std::string_view strategy_name(Strategy s);
/// Accepts the kebab-case names printed by strategy_name().
std::optional<Strategy> parse_strategy(std::string_view name);

struct StrategyConfig {
    Strategy strategy = Strategy::Normy;
    std::size_t w = 6;
    std::size_t y = 5;
    double backtrack_threshold = 0.5;

    void validate() const;
};

/// Resolves anaphora in the final question using earlier turns.
class QuestionRewriter {
public:
    virtual ~QuestionRewriter() = default;
    virtual std::string rewrite(std::span<const std::string> questions, std::size_t n) const = 0;
};

/// Closed-set pronoun substitution with the most recent capitalized span.
class HeuristicRewriter final : public QuestionRewriter {
public:
    std::string rewrite(std::span<const std::string> questions, std::size_t n) const override;
};

std::string rewrite_question(std::span<const std::string> questions, std::size_t n);

/// Returns the predicted answer for turn i of the conversation being modeled.
using AnswerProvider = std::function<std::string(std::size_t turn)>;

/// Caches an expensive provider per turn index. One instance per
/// conversation, owned by a single worker.
class MemoizedAnswers {
public:
    explicit MemoizedAnswers(AnswerProvider compute) : compute_(std::move(compute)) {}
    std::string operator()(std::size_t turn);
    std::size_t computed() const { return cache_.size(); }

private:
    AnswerProvider compute_;
    std::map<std::size_t, std::string> cache_;
};

struct HistoryDeps {
    const encoders::Embedder* embedder = nullptr;   // Backtracking
    const QuestionRewriter* rewriter = nullptr;     // Rewriting; heuristic when null
    AnswerProvider answers;                         // FixedWindowWithAnswers
};

/// Builds the query context for turn n from questions[0..n]. Throws
/// std::out_of_range for a bad n and std::invalid_argument when a strategy's
/// dependency is missing.
QueryContext model_history(const StrategyConfig& config, std::span<const std::string> questions, std::size_t n,
                           const HistoryDeps& deps = {});

/// Concatenates per-turn token lists and keeps the last `cap` tokens: leading
/// turns go first, and the final turn is only cut if it alone exceeds the cap.
TokenSequence prune_turns(const std::vector<std::vector<std::string>>& turns,
                          std::size_t cap = kMaxContextTokens);

}  // namespace normy::history
