// SPDX-License-Identifier: Apache-2.0
#include "sblab/sample_bid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace sblab {

const char* to_string(BidKind k) {
    switch (k) {
        case BidKind::zero: return "zero";
        case BidKind::interior_root: return "interior_root";
        case BidKind::kink: return "kink";
        case BidKind::top: return "top";
    }
    return "?";
}

namespace {

/// Piece list plus suffix integrals tail[k] = integral of v over [q0_k, 1].
class PieceCtx {
public:
    explicit PieceCtx(std::span<const Piece> ps) : ps_(ps) {
        const std::size_t n = ps.size();
        if (n + 1 > small_.size()) heap_.resize(n + 1);
        tail_ = (n + 1 > small_.size()) ? heap_.data() : small_.data();
        tail_[n] = 0.0;
        for (std::size_t k = n; k-- > 0;)
            tail_[k] = tail_[k + 1] + ps[k].value_integral(ps[k].q0, ps[k].q1);
    }

    PieceCtx(const PieceCtx&) = delete;
    PieceCtx& operator=(const PieceCtx&) = delete;

    std::size_t size() const { return ps_.size(); }
    const Piece& operator[](std::size_t k) const { return ps_[k]; }

    /// Payment divided by alpha when the bid sits at quantile q of piece k:
    /// v(q) q + integral of v over [q, 1].
    double pay_over_alpha(std::size_t k, double q) const {
        const Piece& p = ps_[k];
        if (q <= 0.0) return tail_[0];
        return p.revenue(q) + p.value_integral(q, p.q1) + tail_[k + 1];
    }

    /// Roots of v = alpha (A/q - C q + D), i.e. -alpha C q^2 + (alpha D - v) q + alpha A = 0,
    /// ascending. NaN marks a missing root.
    std::array<double, 2> foc_roots(std::size_t k, double v, double alpha) const {
        const Piece& p = ps_[k];
        const double a2 = -alpha * p.C, b1 = alpha * p.D - v, c0 = alpha * p.A;
        std::array<double, 2> r{NAN, NAN};
        if (a2 == 0.0) {
            if (b1 != 0.0) r[0] = -c0 / b1;
            return r;
        }
        const double disc = b1 * b1 - 4.0 * a2 * c0;
        if (disc < 0.0) return r;
        const double sq = std::sqrt(disc);
        const double t = -0.5 * (b1 + std::copysign(sq, b1));
        double x1 = t / a2;
        double x2 = (t != 0.0) ? c0 / t : x1;
        if (x1 > x2) std::swap(x1, x2);
        r[0] = x1;
        r[1] = x2;
        return r;
    }

private:
    std::span<const Piece> ps_;
    std::array<double, 9> small_{};
    std::vector<double> heap_;
    double* tail_ = nullptr;
};

BestResponse zero_response() {
    BestResponse br;
    br.id = CandidateId{-1, 0};
    return br;
}

/// Candidate at quantile q of piece k (q == q0 means the piece's left end).
BestResponse at_quantile(const PieceCtx& ctx, std::size_t k, double q, double v, double alpha,
                         int slot) {
    BestResponse br;
    br.id = CandidateId{static_cast<int>(k), slot};
    br.q_b = q;
    br.payment = alpha * ctx.pay_over_alpha(k, q);
    br.utility = std::isfinite(br.payment) ? v * (1.0 - q) - br.payment : -kInf;
    br.bid = ctx[k].value(q);
    br.top = (q <= 0.0);
    if (slot == 1) br.kind = br.top ? BidKind::top : BidKind::kink;
    else br.kind = BidKind::interior_root;
    return br;
}

BestResponse best_response_ctx(const PieceCtx& ctx, double v, double alpha, double tie_tol) {
    std::array<BestResponse, 32> small;
    std::vector<BestResponse> big;
    std::size_t n = 0;
    auto push = [&](const BestResponse& b) {
        if (n < small.size()) small[n] = b;
        else big.push_back(b);
        ++n;
    };
    auto get = [&](std::size_t i) -> const BestResponse& {
        return i < small.size() ? small[i] : big[i - small.size()];
    };

    push(zero_response());
    for (std::size_t k = 0; k < ctx.size(); ++k) {
        const Piece& p = ctx[k];
        push(at_quantile(ctx, k, p.q0, v, alpha, 1));
        if (p.flat()) continue;
        const auto roots = ctx.foc_roots(k, v, alpha);
        for (int r = 0; r < 2; ++r) {
            const double q = roots[r];
            if (std::isnan(q) || !(q > p.q0 && q < p.q1)) continue;
            push(at_quantile(ctx, k, q, v, alpha, 2 + r));
        }
    }

    double u_max = -kInf;
    for (std::size_t i = 0; i < n; ++i) u_max = std::max(u_max, get(i).utility);
    std::size_t best = 0;
    int within = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const BestResponse& c = get(i);
        if (c.utility < u_max - tie_tol) continue;
        ++within;
        const BestResponse& b = get(best);
        const bool best_ok = b.utility >= u_max - tie_tol;
        if (!best_ok || c.payment < b.payment) best = i;
    }
    BestResponse out = get(best);
    out.tie_break_applied = within > 1 && out.utility < u_max;
    return out;
}

/// Re-evaluates a fixed candidate at a new value (used inside one branch).
BestResponse eval_candidate(const PieceCtx& ctx, CandidateId id, double v, double alpha) {
    if (id.slot == 0 || id.piece < 0) return zero_response();
    const std::size_t k = static_cast<std::size_t>(id.piece);
    const Piece& p = ctx[k];
    if (id.slot == 1) return at_quantile(ctx, k, p.q0, v, alpha, 1);
    const auto roots = ctx.foc_roots(k, v, alpha);
    double q = roots[id.slot - 2];
    if (std::isnan(q)) q = p.q0;
    q = std::clamp(q, p.q0, p.q1);
    return at_quantile(ctx, k, q, v, alpha, id.slot);
}

}  // namespace

double expected_payment(Bid b, const RevenueCurve& curve, double alpha) {
    if (b.top) return alpha * curve.expected_value();
    if (b.value <= 0.0) return 0.0;
    const double qb = curve.quantile(b.value);
    if (qb <= 0.0) return alpha * curve.expected_value();
    return alpha * (b.value * qb + curve.value_tail(qb));
}

double utility(double v, Bid b, const RevenueCurve& curve, double alpha) {
    if (!b.top && b.value <= 0.0) return 0.0;
    const double pay = expected_payment(b, curve, alpha);
    if (!std::isfinite(pay)) return -kInf;
    const double qb = b.top ? 0.0 : curve.quantile(b.value);
    return v * (1.0 - qb) - pay;
}

BestResponse best_response(double v, std::span<const Piece> pieces, double alpha,
                           double tie_tol) {
    PieceCtx ctx(pieces);
    return best_response_ctx(ctx, v, alpha, tie_tol);
}

BestResponse best_response(double v, const RevenueCurve& curve, double alpha, double tie_tol) {
    return best_response(v, std::span<const Piece>(curve.pieces()), alpha, tie_tol);
}

BestResponse best_response_brute(double v, const RevenueCurve& curve, double alpha, int n_bids) {
    n_bids = std::max(n_bids, 2);
    // Truncate the bid domain where the payment alone reaches v.
    double b_hi = curve.top_value();
    if (!std::isfinite(b_hi)) b_hi = curve.value(1e-12);
    if (expected_payment(Bid::at(b_hi), curve, alpha) > v) {
        auto f = [&](double b) { return expected_payment(Bid::at(b), curve, alpha) - v; };
        double lo = 0.0, hi = b_hi;
        for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) >= 0.0 ? hi : lo) = mid;
        }
        b_hi = hi;
    }

    std::vector<BestResponse> cands;
    auto add = [&](Bid b, BidKind kind) {
        BestResponse br;
        br.top = b.top;
        br.bid = b.top ? curve.top_value() : b.value;
        br.q_b = b.top ? 0.0 : (b.value <= 0.0 ? 1.0 : curve.quantile(b.value));
        br.payment = expected_payment(b, curve, alpha);
        br.utility = utility(v, b, curve, alpha);
        br.kind = kind;
        cands.push_back(br);
    };
    add(Bid::at(0.0), BidKind::zero);
    add(Bid::top_bid(), BidKind::top);
    const int n_geo = n_bids / 2, n_uni = n_bids - n_geo;
    for (int i = 1; i <= n_uni; ++i) add(Bid::at(b_hi * i / n_uni), BidKind::interior_root);
    for (int i = 0; i < n_geo; ++i) {
        const double t = (n_geo == 1) ? 0.0 : static_cast<double>(i) / (n_geo - 1);
        add(Bid::at(b_hi * std::pow(1e-6, 1.0 - t)), BidKind::interior_root);
    }

    double u_max = -kInf;
    for (const auto& c : cands) u_max = std::max(u_max, c.utility);
    const BestResponse* best = nullptr;
    int within = 0;
    for (const auto& c : cands) {
        if (c.utility < u_max - kUtilityTol) continue;
        ++within;
        if (!best || c.payment < best->payment) best = &c;
    }
    BestResponse out = *best;
    out.tie_break_applied = within > 1 && out.utility < u_max;
    return out;
}

double integrate_over_types(const RevenueCurve& curve, double alpha,
                            const std::function<double(double, const BestResponse&)>& g,
                            double tol) {
    PieceCtx ctx(curve.pieces());
    auto response = [&](double q) { return best_response_ctx(ctx, curve.value(q), alpha, kUtilityTol); };

    std::vector<double> nodes{kEdgeInset, 1.0};
    constexpr int kSamples = 256;
    for (int i = 1; i < kSamples; ++i) nodes.push_back(static_cast<double>(i) / kSamples);
    for (const Piece& p : curve.pieces())
        if (p.q0 > kEdgeInset) nodes.push_back(p.q0);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    std::vector<CandidateId> ids(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) ids[i] = response(nodes[i]).id;

    struct Segment { double a, b; CandidateId id; };
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        double a = nodes[i], b = nodes[i + 1];
        if (ids[i] == ids[i + 1]) {
            segs.push_back({a, b, ids[i]});
            continue;
        }
        // The chosen candidate switches inside (a, b); locate it.
        double lo = a, hi = b;
        for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (response(mid).id == ids[i] ? lo : hi) = mid;
        }
        const double s = 0.5 * (lo + hi);
        segs.push_back({a, s, ids[i]});
        segs.push_back({s, b, ids[i + 1]});
    }

    double total = 0.0;
    const double seg_tol = tol / static_cast<double>(segs.size());
    for (const Segment& sg : segs) {
        if (sg.b <= sg.a) continue;
        if (sg.id.slot == 0) {
            // Zero bids still enter through g (allocation terms are zero too).
            total += integrate([&](double q) { return g(q, zero_response()); }, sg.a, sg.b, seg_tol);
            continue;
        }
        auto f = [&](double q) { return g(q, eval_candidate(ctx, sg.id, curve.value(q), alpha)); };
        total += integrate(f, sg.a, sg.b, seg_tol);
    }
    return total;
}

double mechanism_revenue(const RevenueCurve& curve, double alpha) {
    return integrate_over_types(curve, alpha,
                                [](double, const BestResponse& br) { return br.payment; });
}

double opt_revenue(const RevenueCurve& curve) { return curve.monopoly_revenue(); }

MechanismEval evaluate(const RevenueCurve& curve, double alpha) {
    MechanismEval e;
    e.alpha = alpha;
    e.revenue = mechanism_revenue(curve, alpha);
    e.opt_revenue = opt_revenue(curve);
    e.ratio = e.opt_revenue / e.revenue;
    return e;
}

double myerson_identity_check(const RevenueCurve& curve, double alpha) {
    const double by_payments = mechanism_revenue(curve, alpha);
    const double virtual_welfare = integrate_over_types(
        curve, alpha, [&](double q, const BestResponse& br) {
            if (br.id.slot == 0) return 0.0;
            const Subgradient s = curve.marginal(q);
            return (1.0 - br.q_b) * 0.5 * (s.plus + s.minus);
        });
    const BestResponse low = best_response(curve.bottom_value(), curve, alpha);
    const double x_low = (low.id.slot == 0) ? 0.0 : 1.0 - low.q_b;
    double boundary = low.payment - curve.bottom_value() * x_low;
    // With R(0) > 0 the top types carry revenue mass R(0) at quantile 0.
    if (curve.revenue(0.0) > 0.0) {
        const BestResponse hi = best_response(curve.value(kEdgeInset), curve, alpha);
        boundary += curve.revenue(0.0) * ((hi.id.slot == 0) ? 0.0 : 1.0 - hi.q_b);
    }
    return std::fabs(by_payments - (virtual_welfare + boundary));
}

}  // namespace sblab
