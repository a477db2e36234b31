// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "sblab/curves.hpp"
#include "sblab/numerics.hpp"
#include "sblab/report.hpp"

namespace sblab {

inline constexpr double kRegularAlpha = 0.7;
inline constexpr double kRegularTarget = 0.545;
/// Monopoly quantile separating the two analyses.
inline constexpr double kQmSplit = 0.62;

// All bounds below are for curves normalized to monopoly revenue 1, so
// v_m = 1/q_m.

// ---- payment / quantile bounds ------------------------------------------

/// Payment lower bound for a bid b in [0, 1/q_m]: alpha ln(b(1-q_m)+1)/(1-q_m).
double payment_lb_low(double b, double q_m, double alpha = kRegularAlpha);

/// Payment lower bound for the bid v_m/alpha: q''/q_m + alpha (w - 1) - alpha ln(q_m)/(1-q_m).
double payment_lb_vm_over_alpha(double q_m, double q_pp, double w, double alpha = kRegularAlpha);

/// Lower bound on q(v) for v in [0, v_m/alpha]. Below v_m it is the line from
/// (q_m, 1) to (1, 0); above it the chord of R between (q'', R(q'')) and (q_m, 1).
/// Throws std::out_of_range past v_m/alpha.
double quantile_lb(double v, double q_m, double q_pp, double alpha = kRegularAlpha);

/// Extra bound on q(v), v in (v_m, v_m/alpha), from the value mass w on [q'', q_m].
double quantile_lb_from_w(double v, double q_m, double q_pp, double w,
                          double alpha = kRegularAlpha);

struct WRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Feasible w for concave curves with the given (q_m, q'').
WRange w_range(double q_m, double q_pp, double alpha = kRegularAlpha);

// ---- critical value ------------------------------------------------------

double critical_lhs(double v, double q_m, double q_pp, double w, double q_hat,
                    double alpha = kRegularAlpha);
double critical_rhs(double v, double q_hat, double alpha = kRegularAlpha);
/// ln(q_hat/q_m) - ln(q_hat)/(1-q_hat), with its limit at q_hat = 1.
double critical_h(double q_hat, double q_m);

struct CriticalValue {
    double v = 0.0;
    bool unbounded = false;  ///< no v below the cap satisfied the inequality
};

/// Smallest v (to bisection tolerance) at which the critical-value inequality
/// holds for every q_hat in [q_m, 1]; sup over each q_hat-grid interval is
/// bounded by RHS at its left end plus alpha h at its right end.
CriticalValue critical_value_ub(double q_m, double q_pp, double w, const Grid1D& q_hat_grid,
                                double alpha = kRegularAlpha, double cap_factor = 10.0);

/// Per-q_m tabulation of G(v) = sup_qhat [RHS(v, qhat) + alpha h(qhat)] on a
/// v grid, so each (q'', w) cell needs only a binary search.
class CriticalValueTable {
public:
    CriticalValueTable(double q_m, int q_hat_steps, int v_steps_per_vm,
                       double alpha = kRegularAlpha, double cap_factor = 10.0);
    /// Smallest v node satisfying the inequality (an upper bound on v*).
    CriticalValue lookup(double q_pp, double w) const;
    double q_m() const { return q_m_; }

private:
    double q_m_, alpha_;
    std::vector<double> v_, g_;
};

// ---- pentagon bid lower bound -------------------------------------------

struct PentagonGrid {
    int n_k = 50;  ///< q_k nodes on [q_m', 1]
    int n_r = 50;  ///< r_k nodes on [(1-q_k)/(1-q_m'), 1]
};

/// Lowest optimal bid of the value at quantile q over pentagons with
/// monopoly quantile on the node set `qm_nodes` (each in [q_m, q]).
double pentagon_bid_lb(double q, const std::vector<double>& qm_nodes, const PentagonGrid& grid,
                       double alpha = kRegularAlpha);
/// Convenience form: n_qm uniform monopoly nodes on [q_m, q].
double pentagon_bid_lb(double q, double q_m, const PentagonGrid& grid, int n_qm = 10,
                       double alpha = kRegularAlpha);

/// bidlb(Q_i, Q_j) for all node pairs j <= i of a fixed quantile grid.
class BidLowerBoundTable {
public:
    BidLowerBoundTable(std::vector<double> nodes, const PentagonGrid& grid,
                       double alpha = kRegularAlpha);
    const std::vector<double>& nodes() const { return nodes_; }
    /// Min over pentagon monopoly quantiles Q_j' with j <= j' <= i.
    double at(std::size_t i, std::size_t j) const { return tab_[i * (i + 1) / 2 + j]; }

private:
    std::vector<double> nodes_;
    std::vector<double> tab_;
};

// ---- r0-line family (q_m >= 0.62) -----------------------------------------

namespace r0line {
/// Utility of value v >= v_m at its first-order bid on the r0-line curve.
double utility(double v, double q_m, double r0, double alpha = kRegularAlpha);
double payment(double v, double q_m, double r0, double alpha = kRegularAlpha);
double bid(double v, double q_m, double r0, double alpha = kRegularAlpha);
/// Quantile of value v on the rising part of the curve.
double quantile(double v, double q_m, double r0);
/// Root of utility(., q_m, r0) in v.
double v_star(double q_m, double r0, double alpha = kRegularAlpha);
/// p(v*) q(v*); only meaningful when v* >= v_m.
double tau(double q_m, double r0, double alpha = kRegularAlpha);
}  // namespace r0line

/// Bound for curves whose critical value is below v_m: -alpha ln(q_m) q_m/(1-q_m).
double branch_a_bound(double q_m, double alpha = kRegularAlpha);

struct LargeBox {
    double qm_lo, qm_hi, r0_lo, r0_hi;
};

struct LargeBoxBound {
    bool excluded = false;  ///< v* < v_m everywhere in the box (branch A covers it)
    double tau = 0.0;
};

LargeBoxBound large_box_bound(const LargeBox& box, double alpha = kRegularAlpha);

// ---- grids and verification ---------------------------------------------

struct RegularGridConfig {
    // Large regime.
    int branch_a_steps = 1000;
    int large_qm_cells = 38;
    int large_r0_cells = 100;
    int large_max_depth = 12;
    /// Boxes are split until their bound clears target + this (or max depth).
    double large_refine_margin = 1e-3;
    // Small regime.
    double small_qm_step = 5e-3;
    std::vector<double> small_qm_tail{1e-4, 2e-4, 5e-4, 1e-3, 2e-3};
    double qpp_step_rel = 5e-3;  ///< q'' step as a fraction of q_m
    int w_cells = 20;
    int q_hat_steps = 200;
    int v_steps_per_vm = 2000;
    int geo_q_nodes = 80;
    PentagonGrid pentagon{50, 50};
    bool certified = false;
};

RegularGridConfig regular_grid(const std::string& scale);

/// Small-regime bound for one q_m, sharing a bid table built over a node
/// set that contains q_m.
class SmallRegimeBound {
public:
    SmallRegimeBound(double q_m, const BidLowerBoundTable& bids, const RegularGridConfig& g,
                     double alpha = kRegularAlpha);

    struct Cell {
        double bound = 0.0;
        double v_crit = 0.0;  ///< upper bound on v*
        double q_star = 0.0;  ///< lower bound on q*
        bool case_ii = false;
        bool case_iii = false;  ///< v* >= v_m/alpha not excluded (bound is 0)
        bool unbounded = false;
    };

    /// Revenue lower bound valid for every (q'', w) in the box.
    Cell cell(double qpp_lo, double qpp_hi, double w_lo, double w_hi) const;

private:
    double integral_from(double q_star) const;

    double q_m_, alpha_;
    CriticalValueTable table_;
    const std::vector<double>& q_;
    std::size_t jm_ = 0;
    std::vector<double> pay_, suffix_;
    double p_low_vm_ = 0.0;
};

/// Bound at a single (q_m, q'', w) with its own tables (for spot checks).
double small_regime_bound(double q_m, double q_pp, double w, const RegularGridConfig& g,
                          double alpha = kRegularAlpha);

CertReport verify_regular_large(double alpha, const RegularGridConfig& grid,
                                double target = kRegularTarget);
CertReport verify_regular_small(double alpha, const RegularGridConfig& grid,
                                double target = kRegularTarget);
/// Both regimes; min over them, pass needs both plus case (iii) empty.
CertReport verify_regular(double alpha, const RegularGridConfig& grid,
                          double target = kRegularTarget);

/// Empirical transfer check: if r1 <= r2 below q_dagger with equality there,
/// a value preferring bid b_dagger = v(q_dagger) over every larger bid under
/// r1 also prefers it under r2. Throws if the precondition fails.
bool revenue_monotone_check(const RevenueCurve& r1, const RevenueCurve& r2, double q_dagger,
                            double v, double alpha = kRegularAlpha, int n_bids = 200);

}  // namespace sblab
