// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>

#include "sblab/curves.hpp"
#include "sblab/numerics.hpp"

namespace sblab {

/// A bid, or TOP: any bid at or above the top of the sample's support.
struct Bid {
    double value = 0.0;
    bool top = false;

    static Bid at(double b) { return Bid{b, false}; }
    static Bid top_bid() { return Bid{kInf, true}; }
};

enum class BidKind { zero, interior_root, kink, top };
const char* to_string(BidKind k);

/// Which candidate produced a best response: the zero bid, the left end of
/// a piece (TOP for piece 0), or one of the two roots of the per-piece
/// first-order condition. Used to integrate revenue branch by branch.
struct CandidateId {
    int piece = -1;
    int slot = 0;  // 0 zero, 1 left end, 2 smaller root, 3 larger root
    bool operator==(const CandidateId&) const = default;
};

struct BestResponse {
    double bid = 0.0;
    bool top = false;
    double q_b = 1.0;  ///< Pr[sample > bid]
    double utility = 0.0;
    double payment = 0.0;
    BidKind kind = BidKind::zero;
    bool tie_break_applied = false;
    CandidateId id;
};

struct MechanismEval {
    double revenue = 0.0;
    double opt_revenue = 0.0;
    double ratio = 0.0;
    double alpha = 0.0;
};

double expected_payment(Bid b, const RevenueCurve& curve, double alpha);
double utility(double v, Bid b, const RevenueCurve& curve, double alpha);

/// Exact best response over the closed candidate set {0, TOP, piece ends,
/// first-order roots}. Ties within `tie_tol` go to the lowest payment.
BestResponse best_response(double v, const RevenueCurve& curve, double alpha,
                           double tie_tol = kUtilityTol);
/// Same solver on a bare piece list (used by the pentagon search, which
/// builds millions of small curves).
BestResponse best_response(double v, std::span<const Piece> pieces, double alpha,
                           double tie_tol = kUtilityTol);

/// Grid oracle: {0, TOP} plus n_bids geometric/uniform bids below the point
/// where the payment alone exceeds v.
BestResponse best_response_brute(double v, const RevenueCurve& curve, double alpha, int n_bids);

double mechanism_revenue(const RevenueCurve& curve, double alpha);
double opt_revenue(const RevenueCurve& curve);
MechanismEval evaluate(const RevenueCurve& curve, double alpha);

/// |revenue - (integral of allocation * R' + p(lowest) - v_low x(lowest))|.
double myerson_identity_check(const RevenueCurve& curve, double alpha);

/// Integrates g(q, best response of v(q)) over q in (0, 1], splitting at the
/// quantiles where the chosen candidate changes.
double integrate_over_types(const RevenueCurve& curve, double alpha,
                            const std::function<double(double, const BestResponse&)>& g,
                            double tol = 1e-10);

}  // namespace sblab
