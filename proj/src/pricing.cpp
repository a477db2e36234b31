// SPDX-License-Identifier: Apache-2.0
#include "sblab/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sblab/numerics.hpp"

namespace sblab {

namespace {

/// Pr[value >= v]: the posted price sells on ties, which matters at atoms.
double quantile_at_least(const RevenueCurve& curve, double v) {
    double q = curve.quantile(v);
    for (const Piece& p : curve.pieces())
        if (p.flat() && std::abs(p.B - v) <= 1e-12 * std::max(1.0, std::abs(v))) q = std::max(q, p.q1);
    return q;
}

}  // namespace

double pricing_revenue(const RevenueCurve& curve, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("pricing_revenue: alpha must be > 0");
    // Split where the price alpha v(t) crosses a piece boundary value, since
    // q jumps across atoms there.
    std::vector<double> cuts{0.0, 1.0};
    for (const Piece& p : curve.pieces()) {
        cuts.push_back(p.q1);
        for (double q : {p.q0, p.q1}) {
            if (q <= 0.0) continue;
            const double t = curve.quantile(p.value(q) / alpha);
            if (t > 0.0 && t < 1.0) cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto f = [&](double t) {
        const double price = alpha * curve.value(t);
        if (!std::isfinite(price)) return 0.0;
        return price * quantile_at_least(curve, price);
    };
    double total = 0.0;
    try {
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            if (cuts[i + 1] > cuts[i]) total += integrate(f, cuts[i], cuts[i + 1], 1e-11);
    } catch (const NumericError&) {
        return kInf;
    }
    return std::isfinite(total) ? total : kInf;
}

double pricing_revenue(const RevenueCurve& curve,
                       const std::vector<std::pair<double, double>>& mixture) {
    if (mixture.empty()) throw std::invalid_argument("pricing_revenue: empty mixture");
    double wsum = 0.0, total = 0.0;
    for (const auto& [w, a] : mixture) {
        if (!(w >= 0.0)) throw std::invalid_argument("pricing_revenue: negative mixture weight");
        wsum += w;
        total += w * pricing_revenue(curve, a);
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("pricing_revenue: weights must sum to 1");
    return total;
}

void GapConstants::check() const {
    if (!(truthful_lb > 0.0 && all_lb > 0.0 && truthful_lb <= truthful_ub && all_lb <= all_ub &&
          all_lb <= truthful_ub))
        throw std::invalid_argument("gap constants need 0 < lb <= ub and all_lb <= truthful_ub");
}

GapConstants default_gap_constants(const std::string& cls) {
    if (cls == "regular") return {1.957, 1.996, 1.0737, 1.835};
    if (cls == "mhr") return {1.543, 1.575, 1.0737, 1.296};
    throw std::invalid_argument("class must be regular or mhr");
}

GapInterval gap_report(const GapConstants& c) {
    c.check();
    return {c.truthful_lb / c.all_ub, c.truthful_ub / c.all_lb};
}

}  // namespace sblab
