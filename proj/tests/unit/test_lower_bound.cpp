#include <doctest.h>

#include <cmath>

#include "sblab/lower_bound.hpp"
#include "sblab/numerics.hpp"

using namespace sblab;

TEST_CASE("feasibility gap on the (1, 2) instance") {
    CHECK(feasibility_gap(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(feasibility_gap(2.0) == doctest::Approx(-1.83211).epsilon(1e-5));
    CHECK(std::abs(feasibility_gap(1.0737)) <= 2e-4);
    CHECK_THROWS(feasibility_gap(0.9));
    double prev = kInf;
    for (int i = 0; i <= 1000; ++i) {
        const double g = feasibility_gap(1.0 + i / 1000.0);
        CHECK(g < prev);
        prev = g;
    }
}

TEST_CASE("solve_beta") {
    const double beta = solve_beta();
    CHECK(beta == doctest::Approx(1.0737).epsilon(1e-3));
    CHECK(beta >= 1.07);
    CHECK(beta <= 1.08);
    CHECK(solve_beta({}, 1e-10) == doctest::Approx(beta).epsilon(1e-6));
    for (double l : {0.5, 1.0, 3.0}) CHECK(solve_beta({l, 2.0 * l}) == doctest::Approx(beta).epsilon(1e-10));
    CHECK(LbInstance{}.reference_instance());
    const LbInstance narrow{1.0, 1.5};
    CHECK_FALSE(narrow.reference_instance());
    CHECK(solve_beta(narrow) > 1.0);
    CHECK_THROWS(LbInstance{1.0, 3.0}.check());
    CHECK_THROWS(LbInstance{2.0, 1.0}.check());
}
