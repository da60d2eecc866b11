#include "tieq/grid.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace tieq;

TEST_CASE("time grid basics") {
    const TimeGrid g = TimeGrid::uniform(1.0, 4);
    CHECK(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.horizon() == 1.0);
    CHECK(g.mesh() == doctest::Approx(0.25));
    CHECK(g.index_of(0.5) == 2);
    CHECK_THROWS_AS(g.index_of(0.33), std::domain_error);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5, 1.0}), std::domain_error);

    const TimeGrid fine = TimeGrid::uniform(1.0, 8);
    CHECK(fine.contains(g));
    CHECK_FALSE(g.contains(fine));
}

TEST_CASE("partition clock") {
    const TimeGrid part = TimeGrid::uniform(1.0, 4);
    CHECK(partition_clock(part, 0.0) == 0.0);
    CHECK(partition_clock(part, 0.6) == doctest::Approx(0.5));
    // the terminal time maps to the last interior node
    CHECK(partition_clock(part, 1.0) == doctest::Approx(0.75));
    CHECK_THROWS_AS(partition_clock(part, 1.5), std::domain_error);

    // 0 <= s - ell(s) <= ||Pi|| on random samples
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const TimeGrid part2({0.0, 0.1, 0.35, 0.6, 1.0});
    for (int i = 0; i < 1000; ++i) {
        const double s = u(rng);
        const double ell = partition_clock(part2, s);
        CHECK(s - ell >= -1e-15);
        CHECK(s - ell <= part2.mesh() + 1e-15);
    }
}

TEST_CASE("spatial grid") {
    const SpatialGrid1D x(-2.0, 2.0, 16);
    CHECK(x.points() == 17);
    CHECK(x.spacing() == doctest::Approx(0.25));
    CHECK(x[0] == doctest::Approx(-2.0));
    CHECK(x[16] == doctest::Approx(2.0));
    CHECK_THROWS_AS(SpatialGrid1D(1.0, -1.0, 16), std::domain_error);
    CHECK_THROWS_AS(SpatialGrid1D(-1.0, 1.0, 8), std::domain_error);
}
