// SPDX-License-Identifier: Apache-2.0
#include "sblab/lower_bound.hpp"

#include <cmath>
#include <stdexcept>

#include "sblab/numerics.hpp"

namespace sblab {

void LbInstance::check() const {
    if (!(l > 0.0 && l < h && h <= 2.0 * l))
        throw std::invalid_argument("lower bound instance needs 0 < l < h <= 2l");
}

bool LbInstance::reference_instance() const { return h == 2.0 * l; }

// Three ingredients, all for a mechanism with ratio beta:
//  - the top type's allocation mass under uniform [l, h], worst case when
//    x(h, s) = 0 for s past l + (h-l)/beta;
//  - the density-case utility of h, at least (h - sqrt(h^2 - 4l(h-l)/beta))/2;
//  - the point-mass utility, at most the midpoint value times (1 - 1/beta).
double feasibility_gap(double beta, const LbInstance& inst) {
    inst.check();
    if (!(beta >= 1.0)) throw std::invalid_argument("feasibility_gap: beta must be >= 1");
    const double l = inst.l, h = inst.h, d = h - l;
    const double s_top = l + d / beta;
    const double mass = 0.5 * (s_top * s_top - l * l) / d;
    const double disc = std::max(0.0, h * h - 4.0 * l * d / beta);
    const double u_lb = 0.5 * (h - std::sqrt(disc));
    return mass - (h - u_lb) - 0.5 * (l + h) * (1.0 - 1.0 / beta);
}

double solve_beta(const LbInstance& inst, double tol) {
    inst.check();
    const auto f = [&](double b) { return feasibility_gap(b, inst); };
    if (f(1.0) * f(2.0) > 0.0) throw NumericError("no-bracket", "inequality never binds");
    return find_root(f, Bracket::make(f, 1.0, 2.0), tol);
}

}  // namespace sblab
