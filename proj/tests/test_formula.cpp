#include <measp/formula.hpp>

#include <doctest.h>

#include <cmath>

using namespace measp;

namespace {

SymbolResolver xy() {
    return [](std::string_view n) -> std::optional<std::size_t> {
        if (n == "x") return 0;
        if (n == "y") return 1;
        return std::nullopt;
    };
}

double eval(std::string_view text, double x = 0, double y = 0) {
    std::vector<double> slots{x, y};
    return Formula::compile(text, xy()).evaluate(slots);
}

bool holds(std::string_view text, double x, double y) {
    std::vector<double> slots{x, y};
    return Condition::compile(text, xy()).holds(slots);
}

} // namespace

TEST_SUITE("formula") {

TEST_CASE("arithmetic and precedence") {
    CHECK(eval("1 + 2 * 3") == 7);
    CHECK(eval("(1 + 2) * 3") == 9);
    CHECK(eval("8 / 4 / 2") == 1);
    CHECK(eval("10 - 4 - 3") == 3);
    CHECK(eval("2 * x ^ 2", 3) == 18);
    CHECK(eval("-x ^ 2", 3) == 9);
    CHECK(eval("- - x", 3) == 3);
    CHECK(eval("x ^ 0", 7) == 1);
    CHECK(eval("1e-3 * 1000") == doctest::Approx(1.0));
    CHECK(eval("x / y", 3, 4) == 0.75);
}

TEST_CASE("division by zero is zero") {
    CHECK(eval("x / y", 3, 0) == 0);
    CHECK(eval("1 + x / (y - y)", 5, 2) == 1);
}

TEST_CASE("ln1p") {
    CHECK(eval("ln1p(x)", 0) == 0);
    CHECK(eval("ln1p(x)", 3) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("compile errors") {
    for (const char* bad : {"", "1 +", "(1", "1)", "z", "exp(1)", "x ^ y", "x ^ 1.5", "2 3", "x $ y"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS((void)Formula::compile(bad, xy()), FormulaError);
    }
}

TEST_CASE("conditions") {
    CHECK(holds("x >= 0.3", 0.3, 0));
    CHECK_FALSE(holds("x > 0.3", 0.3, 0));
    CHECK(holds("x < y", 1, 2));
    CHECK(holds("x <= y and y != 0", 2, 2));
    CHECK_FALSE(holds("x == 1 and y == 1", 1, 0));
    CHECK(holds("x / y == 0", 5, 0));
    CHECK_THROWS_AS((void)Condition::compile("x", xy()), FormulaError);
    CHECK_THROWS_AS((void)Condition::compile("x > 1 and", xy()), FormulaError);
    CHECK_THROWS_AS((void)Condition::compile("x > 1 or y > 1", xy()), FormulaError);
}

}
