// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sblab/curves.hpp"

namespace sblab {

/// Revenue of posting price alpha * s for one sample s from the same
/// distribution: integral over the sample quantile t of alpha v(t) q(alpha v(t)).
/// Returns +inf if the integral does not converge.
double pricing_revenue(const RevenueCurve& curve, double alpha);

/// Finite mixture of scalar multipliers: (weight, alpha) pairs, weights sum to 1.
double pricing_revenue(const RevenueCurve& curve,
                       const std::vector<std::pair<double, double>>& mixture);

/// Ratio bounds per distribution class: truthful mechanisms and all mechanisms.
struct GapConstants {
    double truthful_lb = 0.0;
    double truthful_ub = 0.0;
    double all_lb = 0.0;
    double all_ub = 0.0;
    void check() const;
};

GapConstants default_gap_constants(const std::string& cls);  ///< "regular" or "mhr"

struct GapInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// [truthful_lb / all_ub, truthful_ub / all_lb].
GapInterval gap_report(const GapConstants& c);

}  // namespace sblab
