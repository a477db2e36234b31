// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace sblab::kernel {

/// Minimum of a row of MHR revenue bounds and the lowest index attaining it.
struct RowMin {
    double value;
    std::size_t index;
};

/// Node bounds at fixed q_m for w_k = w0 + k*dw, k < n (normalized q_m v_m = 1).
using NodeRowFn = RowMin (*)(double q_m, double w0, double dw, std::size_t n, double alpha);
/// Box bounds for q_m in [q_lo, q_hi] and w in [w0 + k*dw, w0 + (k+1)*dw], k < n.
using BoxRowFn = RowMin (*)(double q_lo, double q_hi, double w0, double dw, std::size_t n,
                            double alpha);

RowMin node_row_scalar(double q_m, double w0, double dw, std::size_t n, double alpha);
RowMin box_row_scalar(double q_lo, double q_hi, double w0, double dw, std::size_t n,
                      double alpha);

/// Null when the build or the CPU lacks AVX2+FMA.
NodeRowFn node_row_avx2();
BoxRowFn box_row_avx2();

enum class Isa { scalar, avx2 };

/// Chosen once at first use: AVX2 if supported, unless SBLAB_FORCE_SCALAR is set.
Isa active_isa();
const char* isa_name(Isa isa);
NodeRowFn node_row(Isa isa);
BoxRowFn box_row(Isa isa);

/// Scalar references shared by both variants.
double node_bound(double q_m, double w, double alpha);
double box_bound(double q_lo, double q_hi, double w_lo, double w_hi, double alpha);

}  // namespace sblab::kernel
