#include "agentkit/belief.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace agentkit;

namespace {

Predicate food(const std::string& name) {
    return Predicate("food", {Term::text(name)});
}

Predicate on(const std::string& a, const std::string& b) {
    return Predicate("on", {Term::text(a), Term::text(b)});
}

}  // namespace

TEST_SUITE("belief") {

TEST_CASE("add stores ground beliefs and ignores duplicates") {
    BeliefBase bb;
    bb.add(food("nuts"));
    CHECK(bb.contains(food("nuts")));
    CHECK(bb.size() == 1);
    bb.add(food("nuts"));
    CHECK(bb.size() == 1);
}

TEST_CASE("add rejects non-ground predicates") {
    BeliefBase bb;
    CHECK_THROWS_AS(bb.add(Predicate("food", {Term::var("A", TermType::Text)})),
                    NonGroundBelief);
}

TEST_CASE("iteration follows insertion order") {
    BeliefBase bb;
    bb.add(on("a", "table"));
    bb.add(on("b", "a"));
    auto all = bb.beliefs();
    REQUIRE(all.size() == 2);
    CHECK(all[0] == on("a", "table"));
    CHECK(all[1] == on("b", "a"));
}

TEST_CASE("removal is a no-op for absent beliefs and re-insertion re-sequences") {
    BeliefBase bb;
    bb.add(on("a", "table"));
    bb.remove(on("a", "table"));
    CHECK(bb.empty());

    bb.remove(food("kiwi"));  // absent: no-op
    CHECK(bb.empty());

    bb.add(food("a"));
    bb.add(food("b"));
    bb.remove(food("a"));
    bb.add(food("a"));
    auto all = bb.beliefs();
    REQUIRE(all.size() == 2);
    CHECK(all[0] == food("b"));
    CHECK(all[1] == food("a"));
}

TEST_CASE("query binds typed variables in insertion order") {
    BeliefBase bb;
    bb.add(food("nuts"));
    bb.add(food("apples"));
    bb.add(food("oranges"));
    auto subs = bb.query(Predicate("food", {Term::var("A", TermType::Text)}));
    REQUIRE(subs.size() == 3);
    CHECK(subs[0].at("A").text_value() == "nuts");
    CHECK(subs[1].at("A").text_value() == "apples");
    CHECK(subs[2].at("A").text_value() == "oranges");
}

TEST_CASE("query with ground prefix and variable suffix") {
    BeliefBase bb;
    bb.add(Predicate("location",
                     {Term::integer(0), Term::integer(0), Term::text("X")}));
    auto subs = bb.query(Predicate(
        "location", {Term::integer(0), Term::integer(0), Term::var("V", TermType::Text)}));
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].at("V").text_value() == "X");
}

TEST_CASE("repeated variable must bind consistently") {
    BeliefBase bb;
    bb.add(on("a", "b"));
    bb.add(on("c", "c"));
    auto subs = bb.query(Predicate(
        "on", {Term::var("A", TermType::Text), Term::var("A", TermType::Text)}));
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].at("A").text_value() == "c");
}

TEST_CASE("typed variables only match their declared type") {
    BeliefBase bb;
    bb.add(Predicate("p", {Term::integer(3)}));
    CHECK(bb.query(Predicate("p", {Term::var("A", TermType::Text)})).empty());
    CHECK(bb.query(Predicate("p", {Term::var("A", TermType::Int)})).size() == 1);
}

TEST_CASE("holds mirrors query non-emptiness") {
    BeliefBase bb;
    bb.add(Predicate("location",
                     {Term::integer(0), Term::integer(0), Term::text("")}));
    CHECK(bb.holds(Predicate(
        "location", {Term::integer(0), Term::integer(0), Term::text("")})));
    CHECK_FALSE(bb.holds(food("kiwi")));
    bb.add(on("a", "table"));
    CHECK(bb.holds(Predicate("on", {Term::var("A", TermType::Text), Term::text("table")})));
}

TEST_CASE("serialization quotes text and leaves integers bare") {
    BeliefBase bb;
    bb.add(food("nuts"));
    bb.add(Predicate("location",
                     {Term::integer(0), Term::integer(2), Term::text("X")}));
    bb.add(Predicate("flag", {}));
    CHECK(bb.to_text() == "food(\"nuts\")\nlocation(0,2,\"X\")\nflag()\n");
}

TEST_CASE("query agrees with the enumerate-and-unify oracle") {
    std::mt19937 rng(20260809);
    for (int round = 0; round < 50; ++round) {
        BeliefBase bb;
        std::vector<Predicate> plain;
        int count = std::uniform_int_distribution<int>(0, 60)(rng);
        for (int i = 0; i < count; ++i) {
            Predicate p = gen::ground_predicate(rng);
            if (!bb.contains(p)) plain.push_back(p);
            bb.add(p);
        }
        for (int q = 0; q < 20; ++q) {
            Predicate pattern = gen::pattern_predicate(rng);
            auto got = bb.query(pattern);
            auto expected = oracle::query(plain, pattern);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i] == expected[i]);
            }
        }
    }
}

TEST_CASE("query solutions are sound: substituting reproduces a stored belief") {
    std::mt19937 rng(7);
    for (int round = 0; round < 30; ++round) {
        BeliefBase bb;
        int count = std::uniform_int_distribution<int>(1, 40)(rng);
        for (int i = 0; i < count; ++i) bb.add(gen::ground_predicate(rng));
        Predicate pattern = gen::pattern_predicate(rng);
        for (const Substitution& sub : bb.query(pattern)) {
            Predicate instantiated = substitute(sub, pattern);
            CHECK(instantiated.is_ground());
            CHECK(bb.contains(instantiated));
        }
    }
}

TEST_CASE("add then remove restores the original set") {
    std::mt19937 rng(99);
    BeliefBase bb;
    for (int i = 0; i < 20; ++i) bb.add(gen::ground_predicate(rng));
    auto before = bb.beliefs();
    Predicate extra("unique_marker", {Term::text("z")});
    bb.add(extra);
    bb.remove(extra);
    CHECK(bb.beliefs() == before);
}

}  // TEST_SUITE
