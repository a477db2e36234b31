// SPDX-License-Identifier: Apache-2.0
// Scalar reference kernels for the MHR (q_m, w) sweep and the ISA dispatcher.
#include "sblab/mhr_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace sblab::kernel {

// Normalized q_m v_m = 1. Case 1 (alpha w <= v_m) uses the envelope through
// (v_m, q_m) and (0, 1); case 2 the one through (w, 1/e) and (v_m, q_m).
// Treating alpha w == v_m as case 1 avoids the 0/0 at w == v_m when alpha = 1;
// both formulas give 1 there.
double node_bound(double q_m, double w, double alpha) {
    const double aw = alpha * w;
    const double vm = 1.0 / q_m;
    const double lnq = std::log(q_m);
    if (aw <= vm) return aw * std::exp(aw * (q_m * lnq));
    const double t = (aw - vm) / (w - vm);
    return (aw * q_m) * std::exp(t * (-1.0 - lnq));
}

double box_bound(double q_lo, double q_hi, double w_lo, double w_hi, double alpha) {
    const double inv_e = std::exp(-1.0);
    double best = HUGE_VAL;
    // Case 1 part of the box: alpha w <= 1/q <= 1/q_lo.
    if (alpha * w_lo <= 1.0 / q_lo) {
        const double qs = std::clamp(inv_e, q_lo, q_hi);
        const double m = qs * std::log(qs);  // min of q ln q on [q_lo, q_hi]
        const double w_top = std::min(w_hi, 1.0 / (alpha * q_lo));
        best = std::min(best, (alpha * w_lo) * std::exp((alpha * w_top) * m));
    }
    // Case 2 part: alpha w > 1/q >= 1/q_hi. t rises in w and q, L falls in q.
    if (alpha * w_hi > 1.0 / q_hi) {
        const double v_hi = 1.0 / q_lo, v_lo = 1.0 / q_hi;
        const double t_lo =
            (alpha * w_lo > v_hi) ? (alpha * w_lo - v_hi) / (w_lo - v_hi) : 0.0;
        const double t_hi = (alpha * w_hi - v_lo) / (w_hi - v_lo);
        const double L_lo = -1.0 - std::log(q_hi), L_hi = -1.0 - std::log(q_lo);
        const double e = std::min(std::min(t_lo * L_lo, t_lo * L_hi),
                                  std::min(t_hi * L_lo, t_hi * L_hi));
        const double w2 = std::max(w_lo, v_lo / alpha);
        best = std::min(best, (alpha * w2 * q_lo) * std::exp(e));
    }
    return best;
}

RowMin node_row_scalar(double q_m, double w0, double dw, std::size_t n, double alpha) {
    RowMin r{HUGE_VAL, 0};
    for (std::size_t k = 0; k < n; ++k) {
        const double b = node_bound(q_m, w0 + static_cast<double>(k) * dw, alpha);
        if (b < r.value) r = {b, k};
    }
    return r;
}

RowMin box_row_scalar(double q_lo, double q_hi, double w0, double dw, std::size_t n,
                      double alpha) {
    RowMin r{HUGE_VAL, 0};
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = w0 + static_cast<double>(k) * dw;
        const double hi = w0 + static_cast<double>(k + 1) * dw;
        const double b = box_bound(q_lo, q_hi, lo, hi, alpha);
        if (b < r.value) r = {b, k};
    }
    return r;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa active_isa() {
    static const Isa isa = [] {
        if (std::getenv("SBLAB_FORCE_SCALAR")) return Isa::scalar;
        return node_row_avx2() ? Isa::avx2 : Isa::scalar;
    }();
    return isa;
}

NodeRowFn node_row(Isa isa) {
    if (isa == Isa::avx2)
        if (auto f = node_row_avx2()) return f;
    return &node_row_scalar;
}

BoxRowFn box_row(Isa isa) {
    if (isa == Isa::avx2)
        if (auto f = box_row_avx2()) return f;
    return &box_row_scalar;
}

}  // namespace sblab::kernel
