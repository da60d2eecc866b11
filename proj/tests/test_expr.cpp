#include "tieq/common.hpp"
#include "tieq/expr.hpp"

#include <doctest.h>

#include <cmath>

using namespace tieq;

namespace {
double ev(const std::string& s, ExprVars v = {}) { return Expr::parse(s).eval(v); }
}  // namespace

TEST_CASE("expression arithmetic") {
    CHECK(ev("1 + 2 * 3") == doctest::Approx(7.0));
    CHECK(ev("(1 + 2) * 3") == doctest::Approx(9.0));
    CHECK(ev("2 ^ 3 ^ 2") == doctest::Approx(512.0));  // right associative
    CHECK(ev("-2 ^ 2") == doctest::Approx(-4.0));      // unary binds outside the power
    CHECK(ev("10 / 4") == doctest::Approx(2.5));
    CHECK(ev("1 - 2 - 3") == doctest::Approx(-4.0));
}

TEST_CASE("expression functions and variables") {
    CHECK(ev("exp(0)") == doctest::Approx(1.0));
    CHECK(ev("ln(exp(2))") == doctest::Approx(2.0));
    CHECK(ev("sqrt(u^2)", {.u = -3.0}) == doctest::Approx(3.0));
    CHECK(ev("min(t, x)", {.t = 2.0, .x = 1.0}) == doctest::Approx(1.0));
    CHECK(ev("max(tau, 0.5)", {.tau = 0.25}) == doctest::Approx(0.5));
    CHECK(ev("1 + tau * t - x / 2 + u", {.tau = 2.0, .t = 3.0, .x = 4.0, .u = 5.0}) ==
          doctest::Approx(1.0 + 6.0 - 2.0 + 5.0));
}

TEST_CASE("expression errors") {
    CHECK_THROWS_AS(Expr::parse("1 +"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("foo(1)"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("y + 1"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("min(1)"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("(1 + 2"), ConfigError);
    CHECK_THROWS_AS(Expr::parse("1 2"), ConfigError);
}
