#include "helpers.hpp"

#include "evidence.hpp"
#include "mcfr/model_dsl.hpp"
#include "oracle.hpp"

#include <random>

using namespace mcfr;
using mcfr::test::must_parse;
using mcfr::test::must_query;

namespace {

constexpr const char* quantifiers[] = { "E<> ", "A[] ", "E[] ", "A<> " };

} // namespace

TEST_SUITE("properties")
{
    TEST_CASE("reachable state sets match the oracle")
    {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 60; ++i) {
            const auto text = oracle::random_model_text(rng, i);
            CAPTURE(text);
            const auto m = must_parse(text);
            const auto g = oracle::enumerate(m);
            const auto space = explore(m);
            REQUIRE(space.complete());
            REQUIRE(space.size() == g.states.size());
            const auto d = oracle::distances(g);
            for (std::size_t k = 0; k < space.size(); ++k) {
                const auto s = oracle::from_state(space.state(k));
                const auto it = g.index.find(s);
                REQUIRE(it != g.index.end());
                CHECK(space.depth(k) == d[it->second]);
                CHECK(space.successors(k).size() == g.succ[it->second].size());
            }
        }
    }

    TEST_CASE("verdicts and evidence agree with the oracle for every quantifier")
    {
        std::mt19937_64 rng(2024);
        int checked = 0;
        for (int i = 0; i < 80; ++i) {
            const auto text = oracle::random_model_text(rng, i);
            const auto m = must_parse(text);
            const auto g = oracle::enumerate(m);
            for (int k = 0; k < 4; ++k) {
                const auto pred = oracle::random_predicate(rng, m, 3);
                for (const char* quant : quantifiers) {
                    const std::string query = quant + pred;
                    CAPTURE(text);
                    CAPTURE(query);
                    const auto q = must_query(query, m);
                    const auto v = check(m, q);
                    CHECK(oracle::evidence_problem(m, g, q, v) == "");
                    ++checked;
                }
            }
        }
        CHECK(checked == 80 * 4 * 4);
    }

    TEST_CASE("universal quantifiers are the duals of the existential ones")
    {
        std::mt19937_64 rng(99);
        for (int i = 0; i < 40; ++i) {
            const auto m = must_parse(oracle::random_model_text(rng, i));
            for (int k = 0; k < 5; ++k) {
                const auto pred = oracle::random_predicate(rng, m, 3);
                CAPTURE(pred);
                const auto negated = "!(" + pred + ")";
                CHECK(check(m, must_query("A[] " + pred, m)).satisfied()
                      == !check(m, must_query("E<> " + negated, m)).satisfied());
                CHECK(check(m, must_query("A<> " + pred, m)).satisfied()
                      == !check(m, must_query("E[] " + negated, m)).satisfied());
            }
        }
    }

    TEST_CASE("thread count never changes the structured verdict")
    {
        std::mt19937_64 rng(5);
        for (int i = 0; i < 25; ++i) {
            const auto m = must_parse(oracle::random_model_text(rng, i));
            const auto pred = oracle::random_predicate(rng, m, 3);
            for (const char* quant : quantifiers) {
                const auto q = must_query(quant + pred, m);
                ExploreLimits one, four;
                four.threads = 4;
                CHECK(verdict_to_json(m, q, check(m, q, one)).dump() == verdict_to_json(m, q, check(m, q, four)).dump());
            }
        }
    }

    TEST_CASE("truncated exploration is never wrong")
    {
        std::mt19937_64 rng(31);
        for (int i = 0; i < 40; ++i) {
            const auto m = must_parse(oracle::random_model_text(rng, i));
            const auto g = oracle::enumerate(m);
            if (g.states.size() < 4)
                continue;
            ExploreLimits limits;
            limits.max_states = g.states.size() / 2;
            const auto pred = oracle::random_predicate(rng, m, 3);
            for (const char* quant : quantifiers) {
                const auto q = must_query(quant + pred, m);
                const auto v = check(m, q, limits);
                if (v.conclusive()) {
                    CAPTURE(quant + pred);
                    CHECK(v.satisfied() == oracle::holds(g, q));
                    if (v.evidence)
                        CHECK(replay(m, *v.evidence));
                }
            }
        }
    }

    TEST_CASE("rendered models re-parse to the same model")
    {
        std::mt19937_64 rng(17);
        for (int i = 0; i < 50; ++i) {
            const auto m = must_parse(oracle::random_model_text(rng, i));
            const auto text = render_model(m);
            const auto again = must_parse(text);
            CHECK(again == m);
            CHECK(render_model(again) == text);
        }
    }
}
