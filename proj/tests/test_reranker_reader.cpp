#include <algorithm>
#include <map>

#include "doctest.h"
#include "fake_sidecar.hpp"
#include "normy/reader.hpp"
#include "normy/remote.hpp"
#include "normy/reranker.hpp"
#include "normy/text.hpp"
#include "oracles/span_oracle.hpp"
#include "support.hpp"

using namespace normy;
using retriever::ScoredPassage;

namespace {

ScoredPassage scored(const Passage& p, std::uint32_t doc, double s_rt, std::optional<double> s_rr = std::nullopt) {
    ScoredPassage s;
    s.passage = &p;
    s.doc = doc;
    s.bm25 = s_rt;
    s.s_rt = s_rt;
    s.s_rr = s_rr;
    return s;
}

// Returns fixed start/end vectors per passage id.
class ScriptedSpans final : public encoders::SpanScorer {
public:
    std::map<std::string, encoders::SpanScores> table;
    encoders::SpanScores span_scores(std::string_view, const Passage& p) const override { return table.at(p.id); }
};

}  // namespace

TEST_SUITE("reranker") {
    TEST_CASE("window of recent turns") {
        const std::vector<std::string> qs{"q0", "q1", "q2", "q3"};
        CHECK(reranker::window_turns(qs, 3, 2) == std::vector<std::string>{"q1", "q2"});
        CHECK(reranker::window_turns(qs, 3, 6) == std::vector<std::string>{"q0", "q1", "q2"});
        CHECK(reranker::window_turns(qs, 0, 6).empty());
    }

    TEST_CASE("singleton input gains a score") {
        const auto p = Passage::make("p", "", "anything");
        const std::vector<std::string> qs{"anything"};
        const auto out = reranker::rerank(qs, 0, {scored(p, 0, 1.0)}, {}, encoders::BuiltinRelevanceScorer{});
        REQUIRE(out.size() == 1);
        CHECK(out[0].s_rr == 1.0);
    }

    TEST_CASE("hand-computed jaccard order") {
        // query terms {a1, b1, c1}
        const auto p1 = Passage::make("p1", "", "b1 c1 d1 e1");  // 2/5
        const auto p2 = Passage::make("p2", "", "c1 f1 g1");     // 1/5
        const auto p3 = Passage::make("p3", "", "a1 b1 c1 h1");  // 3/4
        const auto p4 = Passage::make("p4", "", "a1 b1 c1");     // 1
        const std::vector<std::string> qs{"a1", "b1 c1"};
        const auto out = reranker::rerank(qs, 1, {scored(p1, 0, 5), scored(p2, 1, 4), scored(p3, 2, 3), scored(p4, 3, 1)},
                                          {}, encoders::BuiltinRelevanceScorer{});
        REQUIRE(out.size() == 4);
        CHECK(out[0].id() == "p4");
        CHECK(out[1].id() == "p3");
        CHECK(out[2].id() == "p1");
        CHECK(out[3].id() == "p2");
        CHECK(*out[1].s_rr == doctest::Approx(0.75));
        CHECK(*out[2].s_rr == doctest::Approx(0.4));
        CHECK(*out[3].s_rr == doctest::Approx(0.2));
    }

    TEST_CASE("ties fall back to retriever score then id") {
        const auto a = Passage::make("a", "", "x1");
        const auto b = Passage::make("b", "", "x2");
        const auto c = Passage::make("c", "", "x3");
        const std::vector<std::string> qs{"zz"};
        const auto out = reranker::rerank(qs, 0, {scored(c, 2, 1.0), scored(b, 1, 2.0), scored(a, 0, 1.0)}, {},
                                          encoders::BuiltinRelevanceScorer{});
        CHECK(out[0].id() == "b");
        CHECK(out[1].id() == "a");
        CHECK(out[2].id() == "c");
    }

    TEST_CASE("reranking permutes its input") {
        testing::Gen g(14);
        for (int round = 0; round < 100; ++round) {
            std::vector<Passage> ps;
            for (std::size_t i = 0, n = g.between(1, 15); i < n; ++i) {
                ps.push_back(Passage::make("p" + std::to_string(i), "", g.sentence(20, 1, 12)));
            }
            std::vector<ScoredPassage> in;
            for (std::size_t i = 0; i < ps.size(); ++i) in.push_back(scored(ps[i], static_cast<std::uint32_t>(i), g.real(0, 5)));
            std::vector<std::string> qs;
            for (std::size_t i = 0, n = g.between(1, 5); i < n; ++i) qs.push_back(g.sentence(20, 1, 5));
            reranker::RerankConfig cfg;
            cfg.w = g.between(1, 8);
            const auto out = reranker::rerank(qs, qs.size() - 1, in, cfg, encoders::BuiltinRelevanceScorer{});
            REQUIRE(out.size() == in.size());
            std::vector<std::string> a, b;
            for (const auto& p : in) a.push_back(p.id());
            for (const auto& p : out) {
                b.push_back(p.id());
                REQUIRE(p.s_rr.has_value());
                CHECK(*p.s_rr >= 0.0);
                CHECK(*p.s_rr <= 1.0);
            }
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
    }

    TEST_CASE("remote failure aborts the whole call") {
        testing::FakeSidecar sidecar({.rerank_out_of_range = true});
        const encoders::RemoteRelevanceScorer scorer(
            std::make_shared<encoders::RemoteClient>(sidecar.url(), std::chrono::seconds(5)));
        const auto p = Passage::make("p", "", "text");
        const std::vector<std::string> qs{"q"};
        CHECK_THROWS_AS(reranker::rerank(qs, 0, {scored(p, 0, 1.0)}, {}, scorer), encoders::RemoteError);
    }
}

TEST_SUITE("reader") {
    TEST_CASE("single token passage") {
        const auto c = reader::best_span_indices(std::vector<double>{0.3}, std::vector<double>{0.4}, 30);
        CHECK(c.start == 0);
        CHECK(c.end == 0);
        CHECK(c.score == doctest::Approx(0.7));
    }

    TEST_CASE("separate start and end peaks") {
        std::vector<double> s(12, 0.0), e(12, 0.0);
        s[4] = 1.0;
        e[9] = 1.0;
        const auto c = reader::best_span_indices(s, e, 30);
        CHECK(c.start == 4);
        CHECK(c.end == 9);
    }

    TEST_CASE("end peak before start peak forces another span") {
        std::vector<double> s{0.1, 0.0, 0.0, 0.0, 0.9, 0.0};
        std::vector<double> e{0.0, 0.8, 0.0, 0.0, 0.0, 0.2};
        // Best pair ignoring order would be (4, 1); the valid best is 0.9 + 0.2.
        const auto c = reader::best_span_indices(s, e, 30);
        CHECK(c.start == 4);
        CHECK(c.end == 5);
        CHECK(c.score == doctest::Approx(1.1));
    }

    TEST_CASE("spans agree with exhaustive search") {
        testing::Gen g(33);
        int binding = 0;
        for (int round = 0; round < 200; ++round) {
            const auto n = g.between(1, 60);
            auto s = g.reals(n, -2, 2);
            auto e = g.reals(n, -2, 2);
            if (round % 4 == 0) {
                // Discrete values create ties.
                for (auto& x : s) x = std::round(x);
                for (auto& x : e) x = std::round(x);
            }
            const auto max_len = g.between(1, 30);
            const auto got = reader::best_span_indices(s, e, max_len);
            const auto want = oracle::best_span(s, e, max_len);
            CHECK(got.start == want.start);
            CHECK(got.end == want.end);
            CHECK(got.score == want.score);
            const auto argmax_s = std::max_element(s.begin(), s.end()) - s.begin();
            const auto argmax_e = std::max_element(e.begin(), e.end()) - e.begin();
            if (argmax_e < argmax_s) ++binding;
        }
        CHECK(binding > 20);
    }

    TEST_CASE("degenerate scores give the first token") {
        const auto p = Passage::make("p", "", "alpha beta gamma");
        const auto span = reader::best_span("unrelated", p, {}, encoders::BuiltinSpanScorer{});
        CHECK(span.start == 0);
        CHECK(span.end == 0);
        CHECK(span.s_rd == 0.0);
        CHECK(span.text == "alpha");
    }

    TEST_CASE("span text and length bound") {
        const auto p = Passage::make("p", "", "In 1867 Marie Curie was born in Warsaw, Poland.");
        reader::ReaderConfig cfg;
        cfg.max_span_len = 3;
        const auto span = reader::best_span("born Warsaw", p, cfg, encoders::BuiltinSpanScorer{});
        CHECK(span.end - span.start + 1 <= 3);
        const std::vector<std::string> toks(p.tokens.begin() + static_cast<long>(span.start),
                                            p.tokens.begin() + static_cast<long>(span.end) + 1);
        CHECK(span.text == text::join(toks));
    }

    TEST_CASE("combined score decides across passages") {
        const auto p1 = Passage::make("p1", "", "a b c");
        const auto p2 = Passage::make("p2", "", "d e f");
        ScriptedSpans spans;
        spans.table["p1"] = {{0.9, 0.1, 0.0}, {0.0, 0.9, 0.1}};  // s_rd 1.8
        spans.table["p2"] = {{0.2, 0.1, 0.0}, {0.0, 0.3, 0.1}};  // s_rd 0.5
        const std::vector<std::string> qs{"q"};
        const history::HeuristicRewriter rw;
        {
            const std::vector<ScoredPassage> c{scored(p1, 0, 1.0, 0.5), scored(p2, 1, 2.0, 0.9)};
            const auto a = reader::answer(qs, 0, c, {}, spans, rw);
            CHECK(a.passage_id == "p2");  // 2.9 + 0.5 > 1.5 + 1.8
            CHECK(a.combined == doctest::Approx(3.4).epsilon(1e-12));
        }
        {
            const std::vector<ScoredPassage> c{scored(p1, 0, 1.0, 0.5)};
            const auto a = reader::answer(qs, 0, c, {}, spans, rw);
            CHECK(a.passage_id == "p1");
            CHECK(a.combined == doctest::Approx(a.s_rt + a.s_rr + a.s_rd).epsilon(1e-12));
        }
        {
            const std::vector<ScoredPassage> c{scored(p1, 0, 2.0, 0.0), scored(p2, 1, 1.0, 1.0)};
            const auto a = reader::answer(qs, 0, c, {}, spans, rw);
            CHECK(a.passage_id == "p1");  // tie at 3.8 vs 2.5 is not a tie; p1 wins
        }
        CHECK_THROWS_AS(reader::answer(qs, 0, {}, {}, spans, rw), std::invalid_argument);
    }

    TEST_CASE("raising the winner's scores keeps it the winner") {
        testing::Gen g(44);
        std::vector<Passage> ps;
        for (int i = 0; i < 8; ++i) ps.push_back(Passage::make("p" + std::to_string(i), "", g.sentence(15, 3, 20)));
        const encoders::BuiltinSpanScorer spans;
        for (int round = 0; round < 100; ++round) {
            std::vector<ScoredPassage> c;
            for (std::size_t i = 0; i < ps.size(); ++i) {
                c.push_back(scored(ps[i], static_cast<std::uint32_t>(i), g.real(0, 5), g.real(0, 1)));
            }
            const auto q = g.sentence(15, 1, 4);
            const auto first = reader::answer_with_question(q, c, {}, spans);
            auto it = std::find_if(c.begin(), c.end(), [&](const ScoredPassage& p) { return p.id() == first.passage_id; });
            REQUIRE(it != c.end());
            CHECK(first.combined == doctest::Approx(first.s_rt + first.s_rr + first.s_rd).epsilon(1e-9));
            it->s_rt += g.real(0, 3);
            it->s_rr = *it->s_rr + g.real(0, 1);
            CHECK(reader::answer_with_question(q, c, {}, spans).passage_id == first.passage_id);
        }
    }

    TEST_CASE("normalization rescales each score family") {
        const auto p1 = Passage::make("p1", "", "a b c");
        const auto p2 = Passage::make("p2", "", "d e f");
        ScriptedSpans spans;
        spans.table["p1"] = {{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};  // s_rd 2
        spans.table["p2"] = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};  // s_rd 0
        const std::vector<ScoredPassage> c{scored(p1, 0, 1.0, 0.0), scored(p2, 1, 40.0, 1.0)};
        reader::ReaderConfig cfg;
        CHECK(reader::answer_with_question("q", c, cfg, spans).passage_id == "p2");
        cfg.normalize_scores = true;
        const auto a = reader::answer_with_question("q", c, cfg, spans);
        CHECK(a.passage_id == "p2");
        CHECK(a.combined == doctest::Approx(2.0));
    }
}
