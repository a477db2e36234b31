#include <doctest.h>

#include <cmath>
#include <vector>

#include "sblab/cert_regular.hpp"
#include "sblab/curves.hpp"
#include "sblab/sample_bid.hpp"
#include "unit/test_util.hpp"

using namespace sblab;

namespace {

constexpr double kA = kRegularAlpha;

/// inf{v : best response bid >= level}, by bisection (bids rise with v).
double value_reaching_bid(const RevenueCurve& c, double level, double v_hi) {
    auto reaches = [&](double v) {
        const BestResponse br = best_response(v, c, kA);
        return br.top || br.bid >= level;
    };
    if (!reaches(v_hi)) return kInf;
    double lo = 0.0, hi = v_hi;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (reaches(mid) ? hi : lo) = mid;
    }
    return hi;
}

/// Pr[value >= v]: the quantile bounds count an atom at v.
double quantile_at_least(const RevenueCurve& c, double v) {
    if (c.value(1.0) >= v) return 1.0;
    double lo = 0.0, hi = 1.0;  // value(lo) >= v > value(hi)
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (c.value(mid) >= v ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

TEST_CASE("payment bound examples") {
    CHECK(payment_lb_low(0.0, 0.62) == 0.0);
    CHECK(payment_lb_low(1.0 / 0.62, 0.62) == doctest::Approx(0.8807).epsilon(1e-4));
    CHECK(payment_lb_low(1.0, 1.0 - 1e-9) == doctest::Approx(0.7).epsilon(1e-8));
    CHECK_THROWS_AS(payment_lb_low(3.0, 0.62), std::out_of_range);
    // 0.6 + 0.7 (0.45 - 1) + 0.7 ln 2 / 0.5
    CHECK(payment_lb_vm_over_alpha(0.5, 0.3, 0.45) == doctest::Approx(1.1854).epsilon(1e-4));
    for (double qm : {0.1, 0.4, 0.6})
        CHECK(payment_lb_vm_over_alpha(qm, qm, 0.0) ==
              doctest::Approx(0.3 - 0.7 * std::log(qm) / (1.0 - qm)).epsilon(1e-12));
    // Tight on the curve that is flat at v_m/alpha down to q'' and linear to (1, 0) after q_m.
    const double qm = 0.4, qpp = 0.2;
    const RevenueCurve c = build(PiecewiseLinearConcave{{{0.0, 0.0}, {qpp, qpp / (0.7 * qm)}, {qm, 1.0}, {1.0, 0.0}}});
    const SmallRegimeDiagnostics d = small_regime_diagnostics(c);
    CHECK(d.q_pp == doctest::Approx(qpp).epsilon(1e-9));
    CHECK(payment_lb_vm_over_alpha(qm, qpp, d.w) ==
          doctest::Approx(expected_payment(Bid::at(1.0 / (0.7 * qm)), c, 0.7)).epsilon(1e-9));
}

TEST_CASE("quantile bound examples") {
    CHECK(quantile_lb(0.0, 0.5, 0.3) == 1.0);
    for (double qm : {0.05, 0.3, 0.6}) CHECK(quantile_lb(1.0 / qm, qm, 0.0) == doctest::Approx(qm).epsilon(1e-14));
    // v = 2 is v_m for q_m = 0.5, so the first branch applies.
    CHECK(quantile_lb(2.0, 0.5, 0.3) == doctest::Approx(0.5));
    // The chord branch meets (q'', v_m/alpha) at its right end.
    CHECK(quantile_lb(2.0 / 0.7, 0.5, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_THROWS_AS(quantile_lb(3.0, 0.5, 0.3), std::out_of_range);
    CHECK(quantile_lb_from_w(1.0, 0.5, 0.3, 0.5) == 0.0);
    const WRange r = w_range(0.5, 0.3);
    CHECK(r.lo < r.hi);
    CHECK(w_range(0.5, 0.0).lo == doctest::Approx(1.0));
}

TEST_CASE("critical-value pieces are monotone in q_hat") {
    for (double qm : {0.05, 0.3, 0.6}) {
        for (double v : {0.5 / qm, 1.0 / qm, 1.3 / qm}) {
            double prev_r = kInf, prev_h = -kInf;
            for (int j = 0; j <= 400; ++j) {
                const double qh = qm + (1.0 - qm) * j / 400.0;
                const double r = critical_rhs(v, qh);
                const double h = critical_h(qh, qm);
                CHECK(r <= prev_r + 1e-12);
                CHECK(h >= prev_h - 1e-12);
                prev_r = r;
                prev_h = h;
            }
        }
    }
}

TEST_CASE("critical value post-condition, monotonicity and table agreement") {
    const double qm = 0.3;
    const Grid1D grid{qm, 1.0, 200};
    double prev = 0.0;
    for (int k = 0; k <= 10; ++k) {
        const double qpp = 0.1;
        const WRange r = w_range(qm, qpp);
        const double w = r.lo + (r.hi - r.lo) * k / 10.0;
        const CriticalValue cv = critical_value_ub(qm, qpp, w, grid);
        REQUIRE_FALSE(cv.unbounded);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double qh = grid.node(j);
            CHECK(critical_lhs(cv.v, qm, qpp, w, qh) >= critical_rhs(cv.v, qh) - 1e-9);
        }
        CHECK(cv.v >= prev - 1e-12);
        prev = cv.v;
        const CriticalValueTable tab(qm, 200, 4000);
        const CriticalValue tv = tab.lookup(qpp, w);
        CHECK(tv.v >= cv.v - 1e-9);
        CHECK(tv.v <= cv.v + 1.0 / qm / 4000 + 1e-9);
    }
}

TEST_CASE("pentagon bid bound") {
    const PentagonGrid grid{20, 20};
    CHECK(pentagon_bid_lb(1.0, 0.3, grid) == 0.0);
    // A pentagon with q_k = q_m and r_k = 1 is the flat-top curve; its
    // interior bid is v/0.7 - 1/(1 - q_hat).
    const double qm = 0.4, q = 0.7;
    const RevenueCurve flat = build(Pentagon{qm, qm, 1.0});
    const BestResponse br = best_response(flat.value(q), flat, kA);
    const double closed = std::clamp(flat.value(q) / kA - 1.0 / (1.0 - qm), 0.0, 1.0 / qm);
    if (br.bid > 0.0) {
        CHECK(br.bid == doctest::Approx(closed).epsilon(1e-9));
    }
    CHECK(pentagon_bid_lb(q, std::vector<double>{qm}, grid) <= br.bid + 1e-12);
}

TEST_CASE("large regime: branch A and boxes") {
    CHECK(branch_a_bound(0.62) == doctest::Approx(-0.7 * std::log(0.62) * 0.62 / 0.38).epsilon(1e-14));
    CHECK(branch_a_bound(0.62) == doctest::Approx(0.546).epsilon(1e-3));
    double prev = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double b = branch_a_bound(0.62 + 0.38 * i / 1000.0);
        CHECK(b >= prev);
        prev = b;
    }
    // Degenerate box equals the point value.
    for (auto [qm, r0] : {std::pair{0.7, 0.5}, std::pair{0.9, 0.8}, std::pair{0.63, 0.95}}) {
        const LargeBoxBound bb = large_box_bound({qm, qm, r0, r0});
        if (bb.excluded) continue;
        CHECK(bb.tau == doctest::Approx(r0line::tau(qm, r0)).epsilon(1e-9));
    }
    // Box bound never exceeds any interior point.
    testing::Rng rng(5);
    for (int t = 0; t < 300; ++t) {
        const double ql = testing::uniform(rng, 0.62, 0.99);
        const double qh = std::min(1.0, ql + testing::uniform(rng, 0.0, 0.01));
        const double rl = testing::uniform(rng, 0.0, 0.99);
        const double rh = std::min(1.0, rl + testing::uniform(rng, 0.0, 0.01));
        const LargeBoxBound bb = large_box_bound({ql, qh, rl, rh});
        if (bb.excluded) continue;
        for (int k = 0; k < 10; ++k) {
            const double q = testing::uniform(rng, ql, qh), r = testing::uniform(rng, rl, rh);
            if (r == 0.0 || r0line::v_star(q, r) < 1.0 / q) continue;
            CHECK(bb.tau <= r0line::tau(q, r) + 1e-12);
        }
    }
}

TEST_CASE("r0-line closed forms against the solver") {
    for (auto [qm, r0] : {std::pair{0.7, 0.5}, std::pair{0.9, 0.8}, std::pair{0.65, 0.3}}) {
        const RevenueCurve c = build(R0Line{r0, qm});
        for (double v : {1.0 / qm * 1.1, 1.0 / qm * 2.0, 4.0}) {
            const BestResponse br = best_response(v, c, kA);
            if (br.top || br.bid == 0.0) continue;
            CHECK(br.bid == doctest::Approx(r0line::bid(v, qm, r0)).epsilon(1e-9));
            CHECK(br.utility == doctest::Approx(r0line::utility(v, qm, r0)).epsilon(1e-9));
        }
        const double vs = r0line::v_star(qm, r0);
        CHECK(std::abs(r0line::utility(vs, qm, r0)) <= 1e-10);
        if (vs >= 1.0 / qm) CHECK(mechanism_revenue(c, kA) >= r0line::tau(qm, r0) - 1e-9);
    }
}

TEST_CASE("bound soundness on sampled concave curves") {
    testing::Rng rng(2024);
    int checked_cv = 0;
    for (int t = 0; t < 50; ++t) {
        const RevenueCurve c = testing::random_concave(rng, 0.05, 0.6);
        const double qm = c.q_m(), vm = c.v_m();
        CAPTURE(qm);
        const SmallRegimeDiagnostics d = small_regime_diagnostics(c);
        // payments
        for (int k = 0; k <= 10; ++k) {
            const double b = vm * k / 10.0;
            CHECK(payment_lb_low(b, qm) <= expected_payment(Bid::at(b), c, kA) + 1e-6);
        }
        CHECK(payment_lb_vm_over_alpha(qm, d.q_pp, d.w) <= expected_payment(Bid::at(vm / kA), c, kA) + 1e-6);
        // quantiles
        for (int k = 0; k < 20; ++k) {
            const double v = vm / kA * k / 20.0;
            CHECK(quantile_lb(v, qm, d.q_pp) <= quantile_at_least(c, v * (1.0 - 1e-12)) + 1e-6);
            CHECK(quantile_lb_from_w(v, qm, d.q_pp, d.w) <= quantile_at_least(c, v * (1.0 - 1e-12)) + 1e-6);
        }
        // w lies in its range
        const WRange r = w_range(qm, d.q_pp);
        CHECK(d.w >= r.lo - 1e-9);
        CHECK(d.w <= r.hi + 1e-9);
        // critical value bounds the value whose bid reaches v_m
        const CriticalValue cv = critical_value_ub(qm, d.q_pp, d.w, Grid1D{qm, 1.0, 200});
        if (!cv.unbounded) {
            const double vs = value_reaching_bid(c, vm, 20.0 * vm);
            CHECK(cv.v >= vs - 1e-6);
            ++checked_cv;
        }
        // pentagon bids
        for (double q : {qm + 0.3 * (1 - qm), qm + 0.7 * (1 - qm)}) {
            const BestResponse br = best_response(c.value(q), c, kA);
            const double lb = pentagon_bid_lb(q, qm, PentagonGrid{20, 20}, 5);
            CHECK(lb <= (br.top ? kInf : br.bid) + 1e-6);
        }
    }
    CHECK(checked_cv >= 30);
}

TEST_CASE("small-regime bound is below true revenue") {
    testing::Rng rng(77);
    const RegularGridConfig g = regular_grid("coarse");
    for (int t = 0; t < 8; ++t) {
        const RevenueCurve c = testing::random_concave(rng, 0.05, 0.6);
        const SmallRegimeDiagnostics d = small_regime_diagnostics(c);
        CAPTURE(d.q_m);
        const double b = small_regime_bound(d.q_m, d.q_pp, d.w, g);
        CHECK(b <= mechanism_revenue(c, kA) + 1e-6);
    }
    // Boundary cell at q'' = 0.7 q_m and the largest w.
    const double qm = 0.5;
    CHECK_NOTHROW(small_regime_bound(qm, 0.7 * qm, w_range(qm, 0.7 * qm).hi, g));
}

TEST_CASE("large-monopoly curves clear the target") {
    testing::Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        const RevenueCurve c = testing::random_concave(rng, 0.62, 1.0);
        CAPTURE(c.q_m());
        CHECK(mechanism_revenue(c, kA) >= kRegularTarget - 1e-6);
    }
}

TEST_CASE("revenue monotone transfer") {
    const RevenueCurve c = build(TruncExp{2.0});
    CHECK(revenue_monotone_check(c, c, 0.5, 1.0));
    // Two r0-lines with the same q_m: the lower r0 sits below up to q_m.
    const double qm = 0.8;
    const RevenueCurve lo = build(R0Line{0.2, qm}), hi = build(R0Line{0.6, qm});
    for (int k = 0; k < 20; ++k) {
        const double v = 1.0 / qm * (1.0 + 0.2 * k);
        CHECK(revenue_monotone_check(lo, hi, qm, v));
    }
    CHECK_THROWS_AS(revenue_monotone_check(hi, lo, qm * 0.5, 2.0), std::invalid_argument);
}

TEST_CASE("bid v/alpha is weakly preferred") {
    testing::Rng rng(31);
    for (int t = 0; t < 50; ++t) {
        const RevenueCurve c = testing::random_concave(rng);
        const double vm = c.v_m();
        for (double v : {vm, 1.5 * vm, 3.0 * vm}) {
            const double u_top = utility(v, Bid::at(v / kA), c, kA);
            for (int k = 0; k <= 20; ++k) {
                const double b = vm + (v / kA - vm) * k / 20.0;
                CHECK(u_top >= utility(v, Bid::at(b), c, kA) - 1e-9);
            }
        }
    }
}

TEST_CASE("coarse regular verification") {
    const CertReport r = verify_regular(kA, regular_grid("coarse"));
    CHECK(r.details["case_iii_empty"].get<bool>());
    CHECK(r.details["large"]["min_bound"].get<double>() >= kRegularTarget);
    // With the corrected payment bound the small regime stays below the
    // target near q_m = 0.62; see the README.
    CHECK(r.min_bound > 0.45);
    CHECK(r.min_bound <= r.details["large"]["min_bound"].get<double>());
    auto j1 = r.to_json(), j2 = verify_regular(kA, regular_grid("coarse")).to_json();
    CHECK(j1 == j2);
}
