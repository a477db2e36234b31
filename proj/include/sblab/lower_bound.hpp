// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace sblab {

/// Two-point instance: uniform [l, h] versus point masses; needs 0 < l < h <= 2l.
struct LbInstance {
    double l = 1.0;
    double h = 2.0;
    void check() const;
    /// True for (l, 2l): a scaling of the (1, 2) reference instance.
    bool reference_instance() const;
};

/// LHS - RHS of the combined imitation inequality; positive means no
/// mechanism reaches ratio beta on this instance.
double feasibility_gap(double beta, const LbInstance& inst = {});

/// Root of feasibility_gap on [1, 2]. Throws NumericError("no-bracket",
/// "inequality never binds") without a sign change.
double solve_beta(const LbInstance& inst = {}, double tol = 1e-12);

}  // namespace sblab
