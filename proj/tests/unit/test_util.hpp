// Shared generators for the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sblab/curves.hpp"

namespace sblab::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random concave piecewise-linear revenue curve: the lower envelope of a
/// rising line and a few falling ones, sampled at their crossings and at
/// random interior quantiles. `qm_lo`/`qm_hi` bound where the peak lands.
inline RevenueCurve random_concave(Rng& rng, double qm_lo = 0.02, double qm_hi = 0.98,
                                   bool positive_r0 = true) {
    for (;;) {
        struct Line {
            double a, b;
        };
        const double peak_q = uniform(rng, qm_lo, qm_hi);
        const double r0 = positive_r0 && uniform(rng, 0, 1) < 0.5 ? uniform(rng, 0.0, 0.6) : 0.0;
        std::vector<Line> lines{{r0, (1.0 - r0) / peak_q}};
        const int n_fall = 1 + static_cast<int>(uniform(rng, 0, 3));
        for (int i = 0; i < n_fall; ++i) {
            // passes above (peak_q, 1) and stays >= 0 at q = 1
            const double end = uniform(rng, 0.0, 1.0);
            const double lift = i == 0 ? 0.0 : uniform(rng, 0.0, 0.3);
            const double slope = (end - (1.0 + lift)) / (1.0 - peak_q);
            lines.push_back({1.0 + lift - slope * peak_q, slope});
        }
        auto env = [&](double q) {
            double m = 1e300;
            for (const Line& l : lines) m = std::min(m, l.a + l.b * q);
            return std::max(0.0, m);
        };
        std::vector<double> qs{0.0, 1.0};
        for (std::size_t i = 0; i < lines.size(); ++i)
            for (std::size_t j = i + 1; j < lines.size(); ++j) {
                if (lines[i].b == lines[j].b) continue;
                const double x = (lines[j].a - lines[i].a) / (lines[i].b - lines[j].b);
                if (x > 1e-6 && x < 1.0 - 1e-6) qs.push_back(x);
            }
        for (int i = 0; i < 3; ++i) qs.push_back(uniform(rng, 0.01, 0.99));
        std::sort(qs.begin(), qs.end());
        PiecewiseLinearConcave spec;
        for (double q : qs)
            if (spec.points.empty() || q - spec.points.back().first > 1e-4)
                spec.points.emplace_back(q, env(q));
        spec.points.back().first = 1.0;
        spec.points.back().second = env(1.0);
        try {
            RevenueCurve c = build(spec);
            if (c.q_m() >= qm_lo && c.q_m() <= qm_hi && c.monopoly_revenue() > 0.0) return normalize(c);
        } catch (const SpecError&) {
        }
    }
}

/// Named curves used by several suites.
inline std::vector<RevenueCurve> regular_test_curves() {
    return {build(TruncExp{0.43}),          build(TruncExp{2.0}),
            build(ShiftedPareto{0.265, 0.735}), build(ShiftedPareto{1.0, 0.0}),
            build(Uniform{0.0, 1.0}),       build(Uniform{1.0, 2.0}),
            build(R0Line{0.3, 0.8}),        build(R0Line{0.0, 0.5}),
            build(Pentagon{0.3, 0.6, 0.8}), build(Triangle{0.4}),
            build(ShiftedExp{1.0, 1.0 / 0.517}), build(ShiftedExp{0.0, 2.0})};
}

}  // namespace sblab::testing
