#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace measp;
using measp::testing::example_program;
using measp::testing::random_program;

TEST_SUITE("ground-model") {

TEST_CASE("example program parses into five rules over four atoms") {
    auto p = example_program();
    CHECK(p.rules().size() == 5);
    CHECK(p.num_atoms() == 4);
    const auto& t = *p.atom_table();
    CHECK(t.name(0) == "a");
    CHECK(t.name(1) == "b");
    CHECK(t.name(2) == "c");
    CHECK(t.name(3) == "k");
    CHECK(p.rules()[0].head == std::vector<AtomId>{0, 1});
    CHECK(p.rules()[1].body.size() == 2);
    CHECK(p.rules()[1].body[0].negated);
    CHECK(p.has_disjunction());
}

TEST_CASE("empty input") {
    auto p = parse_ground_program("");
    CHECK(p.rules().empty());
    CHECK(p.num_atoms() == 0);
    CHECK(print_program(p).empty());
    CHECK(parse_ground_program("  % only a comment\n\n").rules().empty());
}

TEST_CASE("printing") {
    CHECK(print_program(parse_ground_program("a.")) == "a.");
    CHECK(print_program(parse_ground_program(":- a, not b.")) == ":- a, not b.");
    CHECK(print_program(parse_ground_program("a v b :- c.")) == "a | b :- c.");
    CHECK(print_program(parse_ground_program("p(1,x) :- q(-2).")) == "p(1,x) :- q(-2).");
}

TEST_CASE("variables are rejected with a dedicated error") {
    CHECK_THROWS_AS((void)parse_ground_program("p :- q(X)."), NonGroundError);
    try {
        (void)parse_ground_program("a.\np :- q(X).");
        FAIL("expected an error");
    }
    catch (const NonGroundError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 8);
    }
}

TEST_CASE("syntax errors carry a position") {
    for (const char* bad : {"a", "a :- .", "a | .", "a :- not not b.", "a :- b c.", "p(.", "a :- b,, c.", "a # b."}) {
        CAPTURE(bad);
        CHECK_THROWS_AS((void)parse_ground_program(bad), ParseError);
    }
    try {
        (void)parse_ground_program("a.\n  b :- c d.");
        FAIL("expected an error");
    }
    catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 10);
    }
}

TEST_CASE("lexical corner cases") {
    SUBCASE("classical negation is a distinct predicate") {
        auto p = parse_ground_program("-a :- not a. a.");
        CHECK(p.num_atoms() == 2);
        CHECK(p.atom_table()->name(0) == "-a");
    }
    SUBCASE("'not' can be an atom name") {
        auto p = parse_ground_program("not. a :- not.");
        CHECK(p.num_atoms() == 2);
        CHECK_FALSE(p.rules()[1].body[0].negated);
    }
    SUBCASE("'v' is an atom unless it separates head atoms") {
        auto p = parse_ground_program("v. a v b. c :- v.");
        CHECK(p.rules()[1].head.size() == 2);
        CHECK(p.rules()[2].body.size() == 1);
    }
    SUBCASE("duplicate head atoms collapse") {
        auto p = parse_ground_program("a | a | b.");
        CHECK(p.rules()[0].head.size() == 2);
    }
}

TEST_CASE("rule classification predicates") {
    auto p = parse_ground_program("f. a | b. :- a. n :- not f. h :- f, a. d | e :- not f.");
    const auto& r = p.rules();
    CHECK(r[0].is_fact());
    CHECK(r[0].is_horn());
    CHECK(r[1].is_disjunctive_fact());
    CHECK_FALSE(r[1].is_horn());
    CHECK(r[2].is_constraint());
    CHECK(r[2].is_horn());
    CHECK(r[3].is_normal());
    CHECK_FALSE(r[3].is_horn());
    CHECK(r[4].is_horn());
    CHECK(r[5].is_disjunctive());
    CHECK_FALSE(r[5].is_disjunctive_fact());
}

TEST_CASE("round trip on random programs") {
    std::mt19937_64 rng(7);
    for (int i = 0; i != 300; ++i) {
        auto p    = random_program(rng, {.atoms = 10, .rules = 12});
        auto text = print_program(p);
        CAPTURE(text);
        auto q = parse_ground_program(text);
        CHECK(q == p);
        CHECK(print_program(q) == text);
    }
}

TEST_CASE("atom ids are dense and in first-occurrence order") {
    std::mt19937_64 rng(11);
    for (int i = 0; i != 50; ++i) {
        auto p = random_program(rng, {.atoms = 8, .rules = 10});
        std::vector<AtomId> seen;
        for (const auto& r : p.rules()) {
            for (auto a : r.head)
                if (std::find(seen.begin(), seen.end(), a) == seen.end()) seen.push_back(a);
            for (auto l : r.body)
                if (std::find(seen.begin(), seen.end(), l.atom) == seen.end()) seen.push_back(l.atom);
        }
        REQUIRE(seen.size() == p.num_atoms());
        for (std::size_t k = 0; k != seen.size(); ++k) CHECK(seen[k] == k);
    }
}

TEST_CASE("parser never crashes on garbage") {
    std::mt19937_64 rng(3);
    const std::string alphabet = "ab(),.:-|v not%\nX1 ";
    for (int i = 0; i != 3000; ++i) {
        std::string s;
        std::size_t n = rng() % 40;
        for (std::size_t k = 0; k != n; ++k) s += alphabet[rng() % alphabet.size()];
        try {
            auto p = parse_ground_program(s);
            CHECK(parse_ground_program(print_program(p)) == p);
        }
        catch (const ParseError&) {
        }
    }
    for (int i = 0; i != 500; ++i) {
        std::string s;
        std::size_t n = rng() % 30;
        for (std::size_t k = 0; k != n; ++k) s += static_cast<char>(rng() % 256);
        try {
            (void)parse_ground_program(s);
        }
        catch (const ParseError&) {
        }
    }
}

TEST_CASE("stream parsing reads the input once") {
    std::istringstream in("a. b :- a.\n:- b.");
    auto p = parse_ground_program(in);
    CHECK(p.rules().size() == 3);
}

}
