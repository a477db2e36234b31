// SPDX-License-Identifier: Apache-2.0
// Regular curves with monopoly quantile q_m <= 0.62 (normalized to R(q_m) = 1).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sblab/cert_regular.hpp"

namespace sblab {

namespace {

void check_qm(double q_m) {
    if (!(q_m > 0.0 && q_m <= 1.0)) throw std::invalid_argument("q_m must be in (0, 1]");
}

// a and s of the chord through (q'', q'' v_m/alpha) and (q_m, 1): R >= a + s q there,
// so v(q) >= a/q + s.
double chord_a(double q_m, double q_pp, double alpha) {
    return q_pp * (1.0 / alpha - 1.0) / (q_m - q_pp);
}
double chord_s(double q_m, double q_pp, double alpha) {
    return (1.0 - q_pp / (alpha * q_m)) / (q_m - q_pp);
}

}  // namespace

double payment_lb_low(double b, double q_m, double alpha) {
    check_qm(q_m);
    if (!(b >= 0.0 && b <= (1.0 + 1e-12) / q_m))
        throw std::out_of_range("payment_lb_low: bid must be in [0, 1/q_m]");
    if (q_m == 1.0) return alpha * b;
    return alpha * std::log1p(b * (1.0 - q_m)) / (1.0 - q_m);
}

double payment_lb_vm_over_alpha(double q_m, double q_pp, double w, double alpha) {
    check_qm(q_m);
    // alpha R(q'') + alpha w + alpha * (tail integral on [q_m, 1]); the last
    // term is payment_lb_low(v_m) minus its alpha R(q_m) = alpha part.
    return q_pp / q_m + alpha * (w - 1.0) + payment_lb_low(1.0 / q_m, q_m, alpha);
}

double quantile_lb(double v, double q_m, double q_pp, double alpha) {
    check_qm(q_m);
    const double vm = 1.0 / q_m;
    if (!(v >= 0.0)) throw std::out_of_range("quantile_lb: v must be >= 0");
    if (v <= vm) return 1.0 / (1.0 + v * (1.0 - q_m));
    if (v > vm / alpha * (1.0 + 1e-12)) throw std::out_of_range("quantile_lb: v beyond v_m/alpha");
    if (!(q_pp >= 0.0 && q_pp < q_m)) throw std::invalid_argument("quantile_lb: q'' in [0, q_m)");
    return chord_a(q_m, q_pp, alpha) / (v - chord_s(q_m, q_pp, alpha));
}

double quantile_lb_from_w(double v, double q_m, double q_pp, double w, double alpha) {
    check_qm(q_m);
    const double vm = 1.0 / q_m;
    if (!(v > vm && v < vm / alpha)) return 0.0;
    return std::max(0.0, (w + q_pp * vm / alpha - q_m * v) / (vm / alpha - v));
}

WRange w_range(double q_m, double q_pp, double alpha) {
    check_qm(q_m);
    if (!(q_pp >= 0.0 && q_pp <= alpha * q_m)) throw std::invalid_argument("w_range: q'' in [0, alpha q_m]");
    WRange r;
    const double tail = 1.0 - q_pp / (alpha * q_m);
    r.lo = (q_pp > 0.0 ? chord_a(q_m, q_pp, alpha) * std::log(q_m / q_pp) : 0.0) + tail;
    r.hi = tail + std::log(1.0 / alpha);
    return r;
}

double critical_h(double q_hat, double q_m) {
    check_qm(q_m);
    if (q_hat >= 1.0) return std::log(1.0 / q_m) + 1.0;
    return std::log(q_hat / q_m) - std::log1p(q_hat - 1.0) / (1.0 - q_hat);
}

double critical_rhs(double v, double q_hat, double alpha) {
    if (q_hat >= 1.0) return 0.0;
    const double d = 1.0 - q_hat;
    const double b = std::min(1.0 / q_hat, std::max(0.0, v / alpha - 1.0 / d));
    const double t = b * d;
    return v * t / (1.0 + t) - alpha * std::log1p(t) / d;
}

double critical_lhs(double v, double q_m, double q_pp, double w, double q_hat, double alpha) {
    return v * (1.0 - q_pp) - q_pp / q_m - alpha * (w - 1.0) - alpha * critical_h(q_hat, q_m);
}

namespace {

// RHS falls and h rises in q_hat, so sup over a q_hat grid interval is
// bounded by RHS at its left end plus alpha h at its right end.
void qhat_tables(double q_m, const Grid1D& grid, double alpha, std::vector<double>& qh,
                 std::vector<double>& ah) {
    grid.check();
    qh.resize(grid.size());
    ah.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        qh[j] = grid.node(j);
        ah[j] = alpha * critical_h(qh[j], q_m);
    }
}

}  // namespace

CriticalValue critical_value_ub(double q_m, double q_pp, double w, const Grid1D& q_hat_grid,
                                double alpha, double cap_factor) {
    check_qm(q_m);
    if (!(q_hat_grid.lo <= q_m + 1e-15 && q_hat_grid.hi >= 1.0))
        throw std::invalid_argument("critical_value_ub: q_hat grid must cover [q_m, 1]");
    std::vector<double> qh, ah;
    qhat_tables(q_m, q_hat_grid, alpha, qh, ah);
    const double c = -q_pp / q_m - alpha * (w - 1.0);
    auto phi = [&](double v) {
        double g = -kInf;
        for (std::size_t j = 0; j + 1 < qh.size(); ++j)
            g = std::max(g, critical_rhs(v, qh[j], alpha) + ah[j + 1]);
        return v * (1.0 - q_pp) + c - g;
    };
    const double cap = cap_factor / q_m;
    if (phi(cap) < 0.0) return {cap, true};
    if (phi(0.0) >= 0.0) return {0.0, false};
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) >= 0.0 ? hi : lo) = mid;
    }
    return {hi, false};
}

CriticalValueTable::CriticalValueTable(double q_m, int q_hat_steps, int v_steps_per_vm,
                                       double alpha, double cap_factor)
    : q_m_(q_m), alpha_(alpha) {
    check_qm(q_m);
    if (q_hat_steps < 1 || v_steps_per_vm < 1) throw std::invalid_argument("CriticalValueTable: steps >= 1");
    std::vector<double> qh, ah;
    qhat_tables(q_m, Grid1D{q_m, 1.0, q_hat_steps}, alpha, qh, ah);
    const double vm = 1.0 / q_m;
    // Fine nodes up to 2 v_m/alpha (where every v* found in practice lies),
    // ten times coarser from there to the cap.
    const double dv = vm / v_steps_per_vm;
    const double v_mid = 2.0 * vm / alpha, cap = cap_factor * vm;
    for (double v = 0.0; v < v_mid; v += dv) v_.push_back(v);
    for (double v = v_mid; v < cap; v += 10.0 * dv) v_.push_back(v);
    v_.push_back(cap);
    g_.resize(v_.size());
    for (std::size_t k = 0; k < v_.size(); ++k) {
        double g = -kInf;
        for (std::size_t j = 0; j + 1 < qh.size(); ++j)
            g = std::max(g, critical_rhs(v_[k], qh[j], alpha) + ah[j + 1]);
        g_[k] = g;
    }
}

CriticalValue CriticalValueTable::lookup(double q_pp, double w) const {
    const double c = -q_pp / q_m_ - alpha_ * (w - 1.0);
    auto ok = [&](std::size_t k) { return v_[k] * (1.0 - q_pp) + c - g_[k] >= 0.0; };
    if (!ok(v_.size() - 1)) return {v_.back(), true};
    std::size_t lo = 0, hi = v_.size() - 1;  // invariant: ok(hi)
    if (ok(0)) return {v_[0], false};
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return {v_[hi], false};
}

// ---- grids -----------------------------------------------------------------

RegularGridConfig regular_grid(const std::string& scale) {
    RegularGridConfig g;
    if (scale == "coarse") {
        g.branch_a_steps = 400;
        g.large_qm_cells = 19;
        g.large_r0_cells = 50;
        g.large_max_depth = 10;
        g.small_qm_step = 2e-2;
        g.qpp_step_rel = 0.07;  // 10 q'' cells
        g.w_cells = 5;
        g.q_hat_steps = 100;
        g.v_steps_per_vm = 1000;
        g.geo_q_nodes = 40;
        g.pentagon = {12, 12};
    } else if (scale == "fine") {
        g.branch_a_steps = 4000;
        g.large_qm_cells = 76;
        g.large_r0_cells = 200;
        g.large_max_depth = 14;
        g.small_qm_step = 2.5e-3;
        g.qpp_step_rel = 2.5e-3;
        g.w_cells = 40;
        g.q_hat_steps = 400;
        g.v_steps_per_vm = 4000;
        g.geo_q_nodes = 160;
        g.pentagon = {50, 50};
    } else if (scale != "default") {
        throw std::invalid_argument("grid scale must be coarse, default or fine");
    }
    return g;
}

namespace {

std::vector<double> small_qm_nodes(const RegularGridConfig& g) {
    std::vector<double> qs(g.small_qm_tail);
    const int n = static_cast<int>(std::floor(kQmSplit / g.small_qm_step + 1e-9));
    for (int i = 1; i <= n; ++i) qs.push_back(std::min(kQmSplit, i * g.small_qm_step));
    qs.push_back(kQmSplit);
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             qs.end());
    return qs;
}

/// Quantile nodes for the payment integral: every q_m node, a geometric
/// ladder from the smallest q_m to 1 and a uniform ladder on [0.62, 1].
std::vector<double> integral_nodes(const std::vector<double>& qm_nodes, int n_geo) {
    std::vector<double> qs(qm_nodes);
    const double q0 = qm_nodes.front();
    for (int i = 0; i <= n_geo; ++i) qs.push_back(q0 * std::pow(1.0 / q0, static_cast<double>(i) / n_geo));
    for (int i = 0; i <= 40; ++i) qs.push_back(kQmSplit + (1.0 - kQmSplit) * i / 40.0);
    qs.push_back(1.0);
    std::sort(qs.begin(), qs.end());
    std::vector<double> out;
    for (double q : qs)
        if (out.empty() || q - out.back() > 1e-12 * q) out.push_back(std::min(q, 1.0));
    out.back() = 1.0;
    return out;
}

struct CellResult {
    double bound = kInf;
    double q_m = 0, qpp_lo = 0, qpp_hi = 0, w_lo = 0, w_hi = 0, v_crit = 0, q_star = 0;
    bool case_ii = false;
};

struct QmResult {
    CellResult worst;
    double worst_case_i = kInf, worst_case_ii = kInf;
    double max_v_ratio = 0.0;  ///< max V / (v_m/alpha)
    std::size_t cells = 0, unbounded = 0, case_iii = 0;
};

}  // namespace

SmallRegimeBound::SmallRegimeBound(double q_m, const BidLowerBoundTable& bids,
                                   const RegularGridConfig& g, double alpha)
    : q_m_(q_m), alpha_(alpha), table_(q_m, g.q_hat_steps, g.v_steps_per_vm, alpha), q_(bids.nodes()) {
    const double vm = 1.0 / q_m;
    jm_ = static_cast<std::size_t>(std::lower_bound(q_.begin(), q_.end(), q_m * (1.0 - 1e-12)) - q_.begin());
    if (jm_ >= q_.size() || std::abs(q_[jm_] - q_m) > 1e-12 * q_m)
        throw std::invalid_argument("SmallRegimeBound: q_m must be a node of the bid table");
    // Right-endpoint sums of the payment lower bound on [Q_i, 1]; it falls in q.
    const std::size_t n = q_.size();
    pay_.assign(n, 0.0);
    suffix_.assign(n + 1, 0.0);
    for (std::size_t i = jm_; i < n; ++i) pay_[i] = payment_lb_low(std::min(bids.at(i, jm_), vm), q_m, alpha);
    for (std::size_t i = n - 1; i-- > jm_;) suffix_[i] = suffix_[i + 1] + (q_[i + 1] - q_[i]) * pay_[i + 1];
    p_low_vm_ = payment_lb_low(vm, q_m, alpha);
}

double SmallRegimeBound::integral_from(double qs) const {
    if (qs <= q_[jm_]) return (q_[jm_] - qs) * pay_[jm_] + suffix_[jm_];
    if (qs >= 1.0) return 0.0;
    const auto i = static_cast<std::size_t>(std::upper_bound(q_.begin(), q_.end(), qs) - q_.begin()) - 1;
    return (q_[i + 1] - qs) * pay_[i + 1] + suffix_[i + 1];
}

SmallRegimeBound::Cell SmallRegimeBound::cell(double qpp_lo, double qpp_hi, double w_lo,
                                              double w_hi) const {
    const double vm = 1.0 / q_m_;
    Cell c;
    // The inequality's LHS falls in q'' and w: the (hi, hi) corner bounds v*.
    const CriticalValue V = table_.lookup(qpp_hi, w_hi);
    c.v_crit = V.v;
    c.unbounded = V.unbounded;
    if (V.unbounded || V.v >= vm / alpha_) {
        c.case_iii = true;
        c.bound = 0.0;
        return c;
    }
    if (V.v <= vm) {
        c.q_star = quantile_lb(V.v, q_m_, 0.0, alpha_);
    } else {
        c.case_ii = true;
        // chord bound over the q'' interval: a rises, s falls in q''
        const double chord =
            qpp_lo > 0.0 ? chord_a(q_m_, qpp_lo, alpha_) / (V.v - chord_s(q_m_, qpp_hi, alpha_)) : 0.0;
        c.q_star = std::max(chord, quantile_lb_from_w(V.v, q_m_, qpp_lo, w_lo, alpha_));
    }
    const double qs = c.q_star;
    const double p_hi = payment_lb_vm_over_alpha(q_m_, qpp_lo, w_lo, alpha_);
    c.bound = p_hi * std::min(qs, q_m_) + p_low_vm_ * std::max(0.0, qs - q_m_) + integral_from(qs);
    return c;
}

double small_regime_bound(double q_m, double q_pp, double w, const RegularGridConfig& g, double alpha) {
    if (!(q_m > 0.0 && q_m < 1.0)) throw std::invalid_argument("small_regime_bound: q_m in (0,1)");
    const BidLowerBoundTable bids(integral_nodes({q_m}, g.geo_q_nodes), g.pentagon, alpha);
    return SmallRegimeBound(q_m, bids, g, alpha).cell(q_pp, q_pp, w, w).bound;
}

CertReport verify_regular_small(double alpha, const RegularGridConfig& g, double target) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> qms = small_qm_nodes(g);
    const BidLowerBoundTable bids(integral_nodes(qms, g.geo_q_nodes), g.pentagon, alpha);

    std::vector<QmResult> res(qms.size());
    parallel_for(qms.size(), [&](std::size_t iq) {
        const double q_m = qms[iq], vm = 1.0 / q_m;
        const SmallRegimeBound sb(q_m, bids, g, alpha);
        QmResult out;
        const int n_pp = std::max(1, static_cast<int>(std::ceil(alpha / g.qpp_step_rel - 1e-9)));
        auto qpp_node = [&](int a) { return std::min(alpha * q_m, alpha * q_m * a / n_pp); };

        auto consider = [&](double qpp_lo, double qpp_hi, double w_lo, double w_hi) {
            const SmallRegimeBound::Cell r = sb.cell(qpp_lo, qpp_hi, w_lo, w_hi);
            ++out.cells;
            out.unbounded += r.unbounded ? 1 : 0;
            out.case_iii += r.case_iii ? 1 : 0;
            out.max_v_ratio = std::max(out.max_v_ratio, r.v_crit * alpha / vm);
            if (!r.case_iii) {
                double& slot = r.case_ii ? out.worst_case_ii : out.worst_case_i;
                slot = std::min(slot, r.bound);
            }
            if (r.bound < out.worst.bound)
                out.worst = {r.bound, q_m, qpp_lo, qpp_hi, w_lo, w_hi, r.v_crit, r.q_star, r.case_ii};
        };

        if (g.certified) {
            for (int a = 0; a < n_pp; ++a) {
                const double x0 = qpp_node(a), x1 = qpp_node(a + 1);
                // w-range over the q'' interval (its lower edge is not monotone in q'')
                const double a0 = x0 > 0.0 ? chord_a(q_m, x0, alpha) : 0.0;
                const double wl = a0 * std::log(q_m / x1) + 1.0 - x1 / (alpha * q_m);
                const double wh = w_range(q_m, x0, alpha).hi;
                for (int b = 0; b < g.w_cells; ++b) {
                    const double w0 = wl + (wh - wl) * b / g.w_cells;
                    const double w1 = b + 1 == g.w_cells ? wh : wl + (wh - wl) * (b + 1) / g.w_cells;
                    consider(x0, x1, w0, w1);
                }
            }
        } else {
            for (int a = 0; a <= n_pp; ++a) {
                const double x = qpp_node(a);
                const WRange wr = w_range(q_m, x, alpha);
                for (int b = 0; b <= g.w_cells; ++b) {
                    const double w = wr.lo + (wr.hi - wr.lo) * b / g.w_cells;
                    consider(x, x, w, w);
                }
            }
        }
        res[iq] = out;
    });

    CertReport rep;
    rep.name = "regular_small";
    rep.alpha = alpha;
    rep.target = target;
    rep.certified = g.certified;
    rep.min_bound = kInf;
    const QmResult* worst = nullptr;
    double case_i = kInf, case_ii = kInf, max_ratio = 0.0;
    std::size_t unbounded = 0, case_iii = 0;
    for (const QmResult& r : res) {
        rep.cells += r.cells;
        unbounded += r.unbounded;
        case_iii += r.case_iii;
        case_i = std::min(case_i, r.worst_case_i);
        case_ii = std::min(case_ii, r.worst_case_ii);
        max_ratio = std::max(max_ratio, r.max_v_ratio);
        if (!worst || r.worst.bound < worst->worst.bound) worst = &r;
    }
    const CellResult& c = worst->worst;
    rep.min_bound = c.bound;
    rep.argmin = {{"q_m", c.q_m},
                  {"q_pp", {c.qpp_lo, c.qpp_hi}},
                  {"w", {c.w_lo, c.w_hi}},
                  {"v_crit", c.v_crit},
                  {"q_star_lb", c.q_star},
                  {"case", c.bound == 0.0 ? "iii" : c.case_ii ? "ii" : "i"}};
    const bool case_iii_empty = case_iii == 0;
    rep.pass = case_iii_empty && rep.min_bound >= target;
    auto finite_or_null = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
    rep.details = {{"case_iii_empty", case_iii_empty},
                   {"case_iii_cells", case_iii},
                   {"unbounded_cells", unbounded},
                   {"max_v_crit_over_vm_alpha", max_ratio},
                   {"branch_minima", {{"case_i", finite_or_null(case_i)}, {"case_ii", finite_or_null(case_ii)}}},
                   {"coverage",
                    {{"q_m_nodes", qms.size()},
                     {"q_m_range", {qms.front(), qms.back()}},
                     {"q_m_direction", "nodes"},
                     {"q_pp_w", g.certified ? "cells" : "nodes"},
                     {"integral_nodes", bids.nodes().size()}}}};
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

CertReport verify_regular(double alpha, const RegularGridConfig& g, double target) {
    const auto t0 = std::chrono::steady_clock::now();
    const CertReport large = verify_regular_large(alpha, g, target);
    const CertReport small = verify_regular_small(alpha, g, target);
    CertReport rep;
    rep.name = "regular";
    rep.alpha = alpha;
    rep.target = target;
    rep.certified = g.certified;
    rep.cells = large.cells + small.cells;
    const bool small_worse = small.min_bound < large.min_bound;
    rep.min_bound = std::min(large.min_bound, small.min_bound);
    rep.argmin = small_worse ? small.argmin : large.argmin;
    rep.argmin["regime"] = small_worse ? "small" : "large";
    rep.pass = large.pass && small.pass;
    rep.details = {{"case_iii_empty", small.details.at("case_iii_empty")},
                   {"large", large.to_json()},
                   {"small", small.to_json()}};
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace sblab
