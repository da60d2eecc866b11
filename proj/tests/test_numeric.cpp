#include "tieq/common.hpp"
#include "tieq/numeric.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace tieq;

TEST_CASE("pairwise sum and mean/stderr") {
    std::vector<double> xs(1000, 0.1);
    CHECK(pairwise_sum(xs) == doctest::Approx(100.0).epsilon(1e-14));

    std::vector<double> ys{1.0, 2.0, 3.0, 4.0};
    const MeanStderr ms = mean_stderr(ys);
    CHECK(ms.mean == doctest::Approx(2.5));
    // sample sd = sqrt(5/3), se = sd/2
    CHECK(ms.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("adaptive simpson") {
    CHECK(adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(adaptive_simpson([](double x) { return std::exp(-x); }, 0.0, 5.0, 1e-12) ==
          doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-11));
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, 3.14159, 1e-12) ==
          doctest::Approx(1.0 - std::cos(3.14159)).epsilon(1e-10));
}

TEST_CASE("golden section") {
    const auto f = [](double u) { return (u - 0.7) * (u - 0.7) + 2.0; };
    const Minimum1D m = golden_section(f, -1.0, 1.0, 1e-12);
    CHECK(m.u == doctest::Approx(0.7).epsilon(1e-7));
    CHECK(m.value == doctest::Approx(2.0));

    // minimum on the boundary
    const Minimum1D edge = golden_section([](double u) { return u; }, 0.0, 1.0, 1e-12);
    CHECK(edge.u == doctest::Approx(0.0));
}

TEST_CASE("unbounded minimization") {
    const double inf = std::numeric_limits<double>::infinity();
    const Minimum1D m =
        minimize_unbounded([](double u) { return (u - 40.0) * (u - 40.0); }, -inf, inf);
    CHECK(m.attained);
    CHECK(m.u == doctest::Approx(40.0).epsilon(1e-6));

    // escaping minimum on a half line
    const Minimum1D esc = minimize_unbounded([](double u) { return -u; }, 0.0, inf);
    CHECK_FALSE(esc.attained);
}

TEST_CASE("loglog slope fit") {
    std::vector<double> x{0.25, 0.125, 0.0625, 0.03125};
    std::vector<double> y;
    for (double xi : x) y.push_back(3.0 * xi * xi);
    CHECK(fit_loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("interpolation") {
    std::vector<double> xs{0.0, 1.0, 2.0};
    std::vector<double> ys{0.0, 10.0, 40.0};
    CHECK(lerp_on_grid(xs, ys, 0.5) == doctest::Approx(5.0));
    CHECK(lerp_on_grid(xs, ys, 1.5) == doctest::Approx(25.0));
    CHECK(lerp_on_grid(xs, ys, -1.0) == doctest::Approx(0.0));   // clamped
    CHECK(lerp_on_grid(xs, ys, 3.0) == doctest::Approx(40.0));   // clamped
}

TEST_CASE("parallel_for determinism and exceptions") {
    std::vector<double> out(257, 0.0);
    parallel_for(out.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out[i] = static_cast<double>(i);
    }, 4);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<double>(i));

    CHECK_THROWS_AS(parallel_for(8, [](std::size_t, std::size_t) {
        throw SolverError("boom");
    }, 4), SolverError);
}
