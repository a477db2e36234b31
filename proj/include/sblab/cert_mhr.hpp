// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sblab/report.hpp"

namespace sblab {

inline constexpr double kMhrAlpha = 0.824;
inline constexpr double kMhrTarget = 0.7717;

enum class MhrCase { below_reserve, above_reserve };
const char* to_string(MhrCase c);

struct MhrCell {
    double q_m = 1.0;
    double w = 1.0;
    MhrCase which = MhrCase::below_reserve;
    double cert_revenue_lb = 0.0;
};

/// Exponential envelope through (v1, q1) and (v2, q2), evaluated at v >= v2:
/// q2 * (q1/q2)^((v - v2)/(v1 - v2)). Lower-bounds q(v) for MHR curves.
double quantile_envelope_mhr(double v1, double q1, double v2, double q2, double v);

/// (q_m - 1)/(q_m ln q_m), extended by 1 at q_m = 1.
double welfare_lb(double q_m);

/// Normalized (q_m v_m = 1) revenue lower bound of the sample-bid mechanism
/// for an MHR curve with monopoly quantile q_m and expected value w.
MhrCell cell_revenue_lb(double q_m, double w, double alpha);

struct MhrGridConfig {
    double q_lo = 1e-3;
    double q_hi = 1.0;
    double q_step = 1e-3;
    double w_step = 1e-3;
    /// Width of the w range beyond max(welfare_lb, case boundary).
    double w_span = 50.0;
    bool certified = false;
};

MhrGridConfig mhr_grid(const std::string& scale);

CertReport verify_mhr(double alpha, const MhrGridConfig& grid, double target = kMhrTarget);

}  // namespace sblab
