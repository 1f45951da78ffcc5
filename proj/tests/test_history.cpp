#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "normy/history.hpp"
#include "normy/text.hpp"
#include "support.hpp"

using namespace normy;
using namespace normy::history;

namespace {

StrategyConfig with(Strategy s, std::size_t w = 6) {
    StrategyConfig c;
    c.strategy = s;
    c.w = w;
    return c;
}

std::vector<std::string> seq(const QueryContext& ctx) { return std::get<TokenSequence>(ctx).tokens; }

std::vector<std::string> cat(const std::vector<std::string>& qs, const std::vector<std::size_t>& turns) {
    std::vector<std::string> out;
    for (auto t : turns) {
        auto toks = text::tokenize(qs[t]);
        out.insert(out.end(), toks.begin(), toks.end());
    }
    return out;
}

}  // namespace

TEST_SUITE("history") {
    TEST_CASE("turn zero reduces to the first question") {
        const std::vector<std::string> qs{"Who founded Rome?"};
        const encoders::BuiltinEmbedder emb;
        HistoryDeps deps;
        deps.embedder = &emb;
        deps.answers = [](std::size_t) { return std::string("unused"); };
        for (auto s : {Strategy::NoHistory, Strategy::FirstLast, Strategy::FullHistory, Strategy::FixedWindow,
                       Strategy::FixedWindowWithAnswers, Strategy::Backtracking}) {
            CAPTURE(strategy_name(s));
            CHECK(seq(model_history(with(s), qs, 0, deps)) == text::tokenize(qs[0]));
        }
        CHECK(std::get<RewrittenQuestion>(model_history(with(Strategy::Rewriting), qs, 0)).text == qs[0]);
        CHECK(std::get<TermSet>(model_history(with(Strategy::Yake), qs, 0)).terms == text::index_terms(qs[0]));
        CHECK(std::get<PerTurnTermSets>(model_history(with(Strategy::Normy), qs, 0)).turns.size() == 1);
    }

    TEST_CASE("first-last without duplication") {
        const std::vector<std::string> qs{"q zero", "q one", "q two", "q three"};
        CHECK(seq(model_history(with(Strategy::FirstLast), qs, 1)) == cat(qs, {0, 1}));
        CHECK(seq(model_history(with(Strategy::FirstLast), qs, 3)) == cat(qs, {0, 2, 3}));
    }

    TEST_CASE("fixed window of six at turn ten covers turns four to ten") {
        std::vector<std::string> qs;
        for (int i = 0; i <= 10; ++i) qs.push_back("t" + std::to_string(i));
        CHECK(seq(model_history(with(Strategy::FixedWindow), qs, 10)) == cat(qs, {4, 5, 6, 7, 8, 9, 10}));
    }

    TEST_CASE("fixed window at least n equals full history") {
        testing::Gen g(2);
        for (int r = 0; r < 50; ++r) {
            std::vector<std::string> qs;
            for (std::size_t i = 0, n = g.between(1, 8); i < n; ++i) qs.push_back(g.sentence(30, 1, 8));
            const auto n = qs.size() - 1;
            CHECK(seq(model_history(with(Strategy::FixedWindow, std::max<std::size_t>(1, n + g.between(0, 3))), qs, n)) ==
                  seq(model_history(with(Strategy::FullHistory), qs, n)));
        }
    }

    TEST_CASE("full history keeps the last 384 tokens") {
        testing::Gen g(4);
        for (int r = 0; r < 50; ++r) {
            std::vector<std::string> qs;
            for (std::size_t i = 0, n = g.between(1, 40); i < n; ++i) qs.push_back(g.sentence(50, 5, 30));
            const auto n = qs.size() - 1;
            const auto ctx = std::get<TokenSequence>(model_history(with(Strategy::FullHistory), qs, n));
            CHECK(ctx.tokens.size() <= kMaxContextTokens);
            const auto last = text::tokenize(qs[n]);
            REQUIRE(ctx.tokens.size() >= last.size());
            CHECK(std::equal(last.rbegin(), last.rend(), ctx.tokens.rbegin()));
            CHECK(ctx.question_tokens == last.size());
        }
    }

    TEST_CASE("fixed window with answers interleaves predicted answers") {
        const std::vector<std::string> qs{"first q", "second q", "third q"};
        HistoryDeps deps;
        deps.answers = [](std::size_t i) { return "ans" + std::to_string(i); };
        CHECK(seq(model_history(with(Strategy::FixedWindowWithAnswers), qs, 2, deps)) ==
              std::vector<std::string>{"first", "q", "ans0", "second", "q", "ans1", "third", "q"});
        CHECK_THROWS_AS(model_history(with(Strategy::FixedWindowWithAnswers), qs, 2), std::invalid_argument);
    }

    TEST_CASE("memoized answers compute each turn once") {
        int calls = 0;
        MemoizedAnswers memo([&](std::size_t t) {
            ++calls;
            return std::to_string(t);
        });
        CHECK(memo(3) == "3");
        CHECK(memo(3) == "3");
        CHECK(memo(1) == "1");
        CHECK(calls == 2);
        CHECK(memo.computed() == 2);
    }

    TEST_CASE("backtracking skips an off-topic interjection") {
        const std::vector<std::string> qs{"obama presidency obama senate", "weather forecast tomorrow rain",
                                          "obama senate illinois years", "obama senate presidency"};
        // cos(q0, q3) = 3.693 / (2.206 * 1.732) = 0.966 > 0.5
        // cos(q1, q0 q3) = 0, disjoint words
        // cos(q2, q0 q3) = 3.792 / (2 * 3.184) = 0.595 > 0.5
        const encoders::BuiltinEmbedder emb;
        HistoryDeps deps;
        deps.embedder = &emb;
        CHECK(encoders::cosine_sim(emb.embed(qs[0]), emb.embed(qs[3])) == doctest::Approx(0.966).epsilon(1e-3));
        CHECK(encoders::cosine_sim(emb.embed(qs[2]), emb.embed(qs[0] + " " + qs[3])) ==
              doctest::Approx(0.595).epsilon(1e-3));
        CHECK(seq(model_history(with(Strategy::Backtracking), qs, 3, deps)) == cat(qs, {0, 2, 3}));
        CHECK_THROWS_AS(model_history(with(Strategy::Backtracking), qs, 3), std::invalid_argument);
    }

    TEST_CASE("yake context joins history keywords with every last-turn term") {
        const std::vector<std::string> qs{"Who painted the Mona Lisa in Florence?", "Where is it displayed now?"};
        const auto ctx = std::get<TermSet>(model_history(with(Strategy::Yake), qs, 1));
        const auto last = text::index_terms(qs[1]);
        REQUIRE(ctx.terms.size() > last.size());
        CHECK(std::equal(last.rbegin(), last.rend(), ctx.terms.rbegin()));
    }

    TEST_CASE("per-turn term sets have one entry per turn") {
        const std::vector<std::string> qs{"a1 b1 c1", "d1", "e1 f1"};
        const auto ctx = std::get<PerTurnTermSets>(model_history(with(Strategy::Normy), qs, 2));
        CHECK(ctx.turns.size() == 3);
        auto terms = query_terms(ctx);
        std::sort(terms.begin(), terms.end());
        CHECK(terms == std::vector<std::string>{"a1", "b1", "c1", "d1", "e1", "f1"});
    }

    TEST_CASE("rewriting resolves pronouns with the latest capitalized run") {
        const std::vector<std::string> qs{"Where was Barack Obama born?", "Where did he study?"};
        CHECK(rewrite_question(qs, 1) == "Where did Barack Obama study?");
        CHECK(rewrite_question(qs, 0) == qs[0]);
        const std::vector<std::string> lone{"Where was he born?"};
        CHECK(rewrite_question(lone, 0) == "Where was he born?");
        const std::vector<std::string> poss{"Tell me about Marie Curie", "What was her first prize?"};
        CHECK(rewrite_question(poss, 1) == "What was Marie Curie\xE2\x80\x99s first prize?");
        const std::vector<std::string> newest{"Who was Ada Lovelace?", "Did Charles Babbage know?", "When did they meet?"};
        CHECK(rewrite_question(newest, 2) == "When did Charles Babbage meet?");
    }

    TEST_CASE("rewriting is idempotent") {
        const std::vector<std::string> names{"Ada Lovelace", "Paris", "Nobel Prize", "Mount Everest", "Rome"};
        const std::vector<std::string> frames{"What did {} discover?", "Where is {} located?", "Who founded {}?"};
        const std::vector<std::string> follow{"When did he die?", "Is it large?", "What was his role and her role?",
                                              "Who visited them?", "Why?"};
        for (const auto& n : names) {
            for (const auto& f : frames) {
                for (const auto& q : follow) {
                    auto first = f;
                    first.replace(first.find("{}"), 2, n);
                    std::vector<std::string> qs{first, q};
                    const auto once = rewrite_question(qs, 1);
                    qs[1] = once;
                    CHECK(rewrite_question(qs, 1) == once);
                }
            }
        }
    }

    TEST_CASE("strategy names round-trip") {
        for (auto s : {Strategy::NoHistory, Strategy::FirstLast, Strategy::FullHistory, Strategy::FixedWindow,
                       Strategy::FixedWindowWithAnswers, Strategy::Backtracking, Strategy::Rewriting, Strategy::Yake,
                       Strategy::Normy}) {
            CHECK(parse_strategy(strategy_name(s)) == s);
        }
        CHECK_FALSE(parse_strategy("bogus").has_value());
    }

    TEST_CASE("config validation and bad turn index") {
        const std::vector<std::string> qs{"a"};
        CHECK_THROWS_AS(model_history(with(Strategy::FixedWindow, 0), qs, 0), std::invalid_argument);
        CHECK_THROWS_AS(model_history(with(Strategy::NoHistory), qs, 1), std::out_of_range);
    }

    TEST_CASE("conversation jsonl round trip and validation") {
        std::stringstream in(
            R"({"conv_id": "c1", "turns": [{"qid": "c1_q0", "question": "Who?", "gold_passage_id": "p1", "gold_answer": {"text": "x", "passage_id": "p1"}}, {"qid": "c1_q1", "question": "Why?"}]})"
            "\n");
        const auto convs = load_conversations(in);
        REQUIRE(convs.size() == 1);
        CHECK(convs[0].turns[0].gold_answer->text == "x");
        CHECK_FALSE(convs[0].turns[1].gold_passage_id.has_value());
        std::stringstream again(conversation_to_json(convs[0]) + "\n");
        CHECK(conversation_to_json(load_conversations(again)[0]) == conversation_to_json(convs[0]));
        std::stringstream dup(R"({"conv_id": "c", "turns": [{"qid": "a", "question": "x"}, {"qid": "a", "question": "y"}]})");
        CHECK_THROWS(load_conversations(dup));
        std::stringstream empty_q(R"({"conv_id": "c", "turns": [{"qid": "a", "question": ""}]})");
        CHECK_THROWS(load_conversations(empty_q));
    }
}
