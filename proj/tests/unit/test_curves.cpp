#include <doctest.h>

#include <cmath>

#include "sblab/curves.hpp"
#include "sblab/numerics.hpp"
#include "sblab/spec_io.hpp"
#include "unit/test_util.hpp"

using namespace sblab;

TEST_CASE("family monopoly points") {
    const RevenueCurve te = build(TruncExp{0.43});
    CHECK(te.q_m() == doctest::Approx(std::exp(-0.43)).epsilon(1e-12));
    CHECK(te.v_m() == doctest::Approx(0.43).epsilon(1e-12));
    CHECK(te.monopoly_revenue() == doctest::Approx(0.2797).epsilon(1e-3));

    const RevenueCurve pa = build(ShiftedPareto{0.265, 0.735});
    CHECK(pa.q_m() == 1.0);
    CHECK(pa.v_m() == doctest::Approx(1.0));
    CHECK(pa.revenue(0.4) == doctest::Approx(0.735 * 0.4 + 0.265).epsilon(1e-14));

    const RevenueCurve un = build(Uniform{0.0, 1.0});
    CHECK(un.q_m() == doctest::Approx(0.5));
    CHECK(un.monopoly_revenue() == doctest::Approx(0.25));
}

TEST_CASE("expected values") {
    CHECK(expected_value(build(Uniform{0.0, 1.0})) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(expected_value(build(TruncExp{0.43})) == doctest::Approx(1.0 - std::exp(-0.43)).epsilon(1e-12));
    CHECK(std::isinf(expected_value(build(R0Line{1.0, 0.5}))));
}

TEST_CASE("scaling") {
    const RevenueCurve u2 = scale(build(Uniform{0.0, 1.0}), 2.0);
    CHECK(u2.monopoly_revenue() == doctest::Approx(0.5));
    CHECK(u2.value(0.25) == doctest::Approx(1.5));
    const RevenueCurve te = build(TruncExp{0.43});
    CHECK(scale(te, 1.0).value(0.3) == te.value(0.3));
    CHECK(scale(te, 1.0 / te.monopoly_revenue()).monopoly_revenue() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(scale(te, -1.0), SpecError);
    const RevenueCurve back = scale(scale(te, 3.7), 1.0 / 3.7);
    for (int i = 1; i <= 100; ++i) CHECK(std::abs(back.value(i / 100.0) - te.value(i / 100.0)) <= 1e-9);
}

TEST_CASE("validation of regularity and MHR") {
    const RevenueCurve te = build(TruncExp{0.43});
    CHECK(validate(te, CurveClass::regular).ok);
    CHECK(validate(te, CurveClass::mhr).ok);
    const RevenueCurve pa = build(ShiftedPareto{0.265, 0.735});
    CHECK(validate(pa, CurveClass::regular).ok);
    CHECK_FALSE(validate(pa, CurveClass::mhr).ok);
    // Non-concave revenue built directly from pieces (the spec parser rejects it).
    std::vector<Piece> ps{Piece{0.0, 0.5, 0.0, 0.4, 0.0, 0.0}, Piece{0.5, 1.0, -0.3, 1.0, 0.0, 0.0}};
    const RevenueCurve bumpy(ps, 1.0, "bumpy");
    CHECK_FALSE(validate(bumpy, CurveClass::regular).ok);
    CHECK_THROWS_AS(build(PiecewiseLinearConcave{{{0.0, 0.0}, {0.5, 0.2}, {1.0, 0.7}}}), SpecError);
}

TEST_CASE("curve invariants on every family") {
    for (const RevenueCurve& c : testing::regular_test_curves()) {
        CAPTURE(c.label());
        double best = 0.0;
        for (int i = 1; i <= 1000; ++i) {
            const double q = i / 1000.0;
            CHECK(std::abs(c.revenue(q) - q * c.value(q)) <= 1e-12 * std::max(1.0, c.revenue(q)));
            best = std::max(best, c.revenue(q));
        }
        CHECK(c.monopoly_revenue() >= best - 1e-12);
        // Round trip through the quantile function away from atoms.
        for (int i = 1; i < 20; ++i) {
            const double q = i / 20.0;
            const double v = c.value(q);
            bool on_flat = false;
            for (const Piece& p : c.pieces()) on_flat = on_flat || (p.flat() && q >= p.q0 && q <= p.q1);
            if (on_flat) continue;
            CHECK(c.value(c.quantile(v)) == doctest::Approx(v).epsilon(1e-9));
        }
        // Fundamental theorem on R', starting inside (0, 1] where R(0+) is finite.
        const double lo = 1e-9;
        const double integral = integrate([&](double q) { return c.marginal(q).plus; }, lo, 1.0, 1e-10);
        CHECK(integral == doctest::Approx(c.revenue(1.0) - c.revenue(lo)).epsilon(1e-7));
    }
}

TEST_CASE("small-regime diagnostics of a triangle") {
    const SmallRegimeDiagnostics d = small_regime_diagnostics(normalize(build(Triangle{0.4})));
    CHECK(d.q_m == doctest::Approx(0.4));
    CHECK(d.q_pp == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d.w == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spec JSON round trip and errors") {
    const DistributionSpec s = spec_from_json(nlohmann::json::parse(R"({"family":"trunc_exp","T":0.43})"));
    CHECK(family_name(s) == "trunc_exp");
    CHECK(spec_to_json(s)["T"] == 0.43);
    const auto pw = spec_from_json(nlohmann::json::parse(
        R"({"family":"piecewise_linear_concave","points":[[0,0],[0.5,1],[1,0.2]]})"));
    CHECK(build(pw).q_m() == doctest::Approx(0.5));
    CHECK(spec_to_json(spec_from_json(spec_to_json(pw))) == spec_to_json(pw));
    CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"trunc_exp","T":0.43,"x":1})")), SpecError);
    CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"nope"})")), SpecError);
    CHECK_THROWS_AS(build(spec_from_json(nlohmann::json::parse(R"({"family":"uniform","l":2,"h":1})"))), SpecError);
}
