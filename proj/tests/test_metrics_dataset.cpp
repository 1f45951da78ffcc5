#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "normy/dataset.hpp"
#include "normy/metrics.hpp"
#include "normy/text.hpp"
#include "oracles/metric_oracle.hpp"
#include "support.hpp"

using namespace normy;
using metrics::ModuleResult;

namespace {

ModuleResult result(const std::string& qid, std::vector<std::string> ids) {
    return ModuleResult{"c", qid, std::move(ids), std::nullopt};
}

std::string words(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + ("w" + std::to_string(i));
    return s;
}

// Random result set with its oracle mirror.
std::pair<std::vector<ModuleResult>, metrics::GoldPassages> random_results(testing::Gen& g,
                                                                           std::vector<oracle::Ranked>& mirror) {
    std::vector<ModuleResult> rs;
    metrics::GoldPassages gold;
    mirror.clear();
    for (std::size_t q = 0, nq = g.between(0, 12); q < nq; ++q) {
        std::vector<std::string> pool;
        for (int i = 0; i < 20; ++i) pool.push_back("p" + std::to_string(i));
        std::shuffle(pool.begin(), pool.end(), g.rng);
        pool.resize(g.between(0, 15));
        const auto qid = "q" + std::to_string(q);
        const auto g_id = "p" + std::to_string(g.below(20));
        rs.push_back(result(qid, pool));
        gold[qid] = g_id;
        mirror.push_back({pool, g_id});
    }
    return {rs, gold};
}

std::string random_answer(testing::Gen& g) {
    static const std::vector<std::string> pieces{"the", "a", "An", "Obama", "obama,", "born", "in", "Hawaii.",
                                                 "1961", "(US)", "U.S.", "was", "\"quoted\"", "x-y", "THE"};
    std::string s;
    for (std::size_t i = 0, n = g.between(0, 8); i < n; ++i) {
        s += (i ? (g.chance(0.2) ? "  " : " ") : "") + pieces[g.below(pieces.size())];
    }
    return s;
}

}  // namespace

TEST_SUITE("metrics") {
    TEST_CASE("reciprocal rank examples") {
        const std::vector<ModuleResult> always{result("a", {"g1", "x"}), result("b", {"g2"})};
        const metrics::GoldPassages gold{{"a", "g1"}, {"b", "g2"}, {"c", "g3"}};
        CHECK(metrics::mrr(always, gold) == 1.0);
        const std::vector<ModuleResult> half{result("a", {"x", "g1"}), result("b", {"x", "y"})};
        CHECK(metrics::mrr(half, gold) == doctest::Approx(0.25));
        const std::vector<ModuleResult> four{result("a", {"x", "y", "z", "g1"}), result("b", {"x", "y", "z", "g2"})};
        CHECK(metrics::mrr(four, gold) == doctest::Approx(0.25));
        CHECK(metrics::mrr({}, gold) == 0.0);
    }

    TEST_CASE("recall examples") {
        const metrics::GoldPassages gold{{"a", "g"}};
        const std::vector<ModuleResult> short_list{result("a", {"x", "g"})};
        CHECK(metrics::recall_at_k(short_list, gold, 10) == 1.0);
        const std::vector<ModuleResult> six{result("a", {"1", "2", "3", "4", "5", "g"})};
        CHECK(metrics::recall_at_k(six, gold, 5) == 0.0);
        CHECK(metrics::recall_at_k(six, gold, 10) == 1.0);
        std::vector<ModuleResult> ten;
        metrics::GoldPassages g10;
        for (int i = 0; i < 10; ++i) {
            const auto q = "q" + std::to_string(i);
            g10[q] = "g";
            ten.push_back(result(q, i < 3 ? std::vector<std::string>{"g"} : std::vector<std::string>{"x", "g"}));
        }
        CHECK(metrics::recall_at_k(ten, g10, 1) == doctest::Approx(0.3));
    }

    TEST_CASE("missing gold names the qid") {
        const std::vector<ModuleResult> rs{result("lost-7", {"x"})};
        CHECK_THROWS_WITH_AS(metrics::mrr(rs, {}), doctest::Contains("lost-7"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(metrics::recall_at_k(rs, {}, 1), doctest::Contains("lost-7"), std::invalid_argument);
    }

    TEST_CASE("token f1 examples") {
        CHECK(metrics::token_f1("Barack Obama", "Barack Obama") == 1.0);
        CHECK(metrics::token_f1("the Obama", "Obama") == 1.0);
        // gold keeps "was" and "in": P = 2/3, R = 2/5
        CHECK(metrics::token_f1("barack obama born", "obama was born in hawaii") == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(metrics::token_f1("", "") == 1.0);
        CHECK(metrics::token_f1("the", "") == 1.0);
        CHECK(metrics::token_f1("", "x") == 0.0);
        CHECK(metrics::token_f1("Hawaii.", "hawaii") == 1.0);
        CHECK(metrics::token_f1("U.S.", "us") == 1.0);
        CHECK(metrics::normalize_answer("  The  cat,  an OWL ") == std::vector<std::string>{"cat", "owl"});
    }

    TEST_CASE("metrics agree with brute force on random result sets") {
        testing::Gen g(101);
        std::vector<oracle::Ranked> mirror;
        for (int trial = 0; trial < 1000; ++trial) {
            const auto [rs, gold] = random_results(g, mirror);
            const double m = metrics::mrr(rs, gold);
            CHECK(m == doctest::Approx(oracle::mrr(mirror)).epsilon(1e-12));
            double prev = 0;
            for (std::size_t k = 1; k <= 16; ++k) {
                const double r = metrics::recall_at_k(rs, gold, k);
                CHECK(r == doctest::Approx(oracle::recall(mirror, k)).epsilon(1e-12));
                CHECK(r >= prev);
                prev = r;
            }
            CHECK(metrics::recall_at_k(rs, gold, 1) <= m + 1e-12);
            CHECK(m <= 1.0);
            const auto a = random_answer(g);
            const auto b = random_answer(g);
            CHECK(metrics::token_f1(a, b) == doctest::Approx(oracle::f1(a, b)).epsilon(1e-12));
            CHECK(metrics::token_f1(a, b) == metrics::token_f1(b, a));
        }
    }
}

TEST_SUITE("dataset") {
    TEST_CASE("chunk boundaries") {
        const auto chunk_sizes = [](std::size_t n) {
            std::vector<std::size_t> sizes;
            for (const auto& p : dataset::chunk_documents({{"d", "", words(n)}}, 384)) sizes.push_back(p.tokens.size());
            return sizes;
        };
        CHECK(chunk_sizes(100) == std::vector<std::size_t>{100});
        CHECK(chunk_sizes(384) == std::vector<std::size_t>{384});
        CHECK(chunk_sizes(385) == std::vector<std::size_t>{384, 1});
        CHECK(chunk_sizes(1000) == std::vector<std::size_t>{384, 384, 232});
        const auto chunks = dataset::chunk_documents({{"d", "T", words(1000)}}, 384);
        CHECK(chunks[0].id == "d#0");
        CHECK(chunks[2].id == "d#2");
        CHECK(chunks[1].tokens.front() == "w384");
        CHECK(chunks[2].title == "T");
    }

    TEST_CASE("chunks re-tokenize to their own tokens") {
        testing::Gen g(5);
        std::vector<dataset::Document> docs;
        for (int i = 0; i < 30; ++i) {
            std::string t;
            for (std::size_t k = 0, n = g.between(0, 900); k < n; ++k) {
                t += g.word(50);
                t += g.chance(0.1) ? ", " : (g.chance(0.05) ? ". " : " ");
            }
            docs.push_back({"doc" + std::to_string(i), "", t});
        }
        for (const auto& len : {1u, 7u, 384u}) {
            const auto chunks = dataset::chunk_documents(docs, len);
            std::map<std::string, std::vector<std::string>> joined;
            for (const auto& c : chunks) {
                CHECK(c.tokens.size() <= len);
                CHECK(!c.tokens.empty());
                CHECK(text::tokenize(c.text) == c.tokens);
                auto& all = joined[c.id.substr(0, c.id.find('#'))];
                all.insert(all.end(), c.tokens.begin(), c.tokens.end());
            }
            for (const auto& d : docs) {
                const auto toks = text::tokenize(d.text);
                if (toks.empty()) continue;
                CHECK(joined[d.id] == toks);
            }
        }
    }

    TEST_CASE("documents round trip through json lines") {
        const std::vector<dataset::Document> docs{{"a", "Title \"A\"", "line\none"}, {"b", "", "plain"}};
        std::stringstream ss;
        for (const auto& d : docs) ss << dataset::document_to_json(d) << "\n";
        const auto back = dataset::load_documents(ss);
        REQUIRE(back.size() == 2);
        CHECK(back[0].title == docs[0].title);
        CHECK(back[0].text == docs[0].text);
        std::stringstream bad("{\"id\": \"x\"}\n");
        CHECK_THROWS(dataset::load_documents(bad));
    }

    TEST_CASE("answer containment is token contiguous") {
        const auto p = Passage::make("p", "", "Obama was born in Honolulu, Hawaii in 1961.");
        CHECK(dataset::contains_answer(p, "Honolulu, Hawaii"));
        CHECK(dataset::contains_answer(p, "born in honolulu"));
        CHECK_FALSE(dataset::contains_answer(p, "born Honolulu"));
    }

    TEST_CASE("gold resolution picks the earliest answering chunk") {
        // "needle" appears in chunks 1 and 2 of doc d.
        std::string text = words(10) + " needle " + words(9) + " needle " + words(3);
        const auto chunks = dataset::chunk_documents({{"d", "", text}, {"e", "", "other needle"}}, 10);
        const auto idx = InvertedIndex::build(chunks);
        history::Conversation conv;
        conv.conv_id = "c";
        conv.turns.push_back({"q0", "where?", std::nullopt, history::GoldAnswer{"needle", "d"}});
        conv.turns.push_back({"q1", "and?", std::string("e#0"), history::GoldAnswer{"needle", "d"}});
        conv.turns.push_back({"q2", "skip", std::nullopt, std::nullopt});
        conv.turns.push_back({"q3", "direct", std::nullopt, history::GoldAnswer{"other", "e#0"}});
        const auto gold = dataset::resolve_gold(idx, {conv});
        CHECK(gold.at("q0") == "d#1");
        CHECK(gold.at("q1") == "e#0");
        CHECK(gold.count("q2") == 0);
        CHECK(gold.at("q3") == "e#0");
        conv.turns.push_back({"q4", "bad", std::nullopt, history::GoldAnswer{"absent words", "e#0"}});
        CHECK_THROWS_AS(dataset::resolve_gold(idx, {conv}), std::runtime_error);
    }
}
