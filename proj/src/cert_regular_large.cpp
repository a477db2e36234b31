// SPDX-License-Identifier: Apache-2.0
// Regular curves with monopoly quantile q_m >= 0.62: closed-form branch for
// v* <= v_m and the r0-line family for v* >= v_m.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sblab/cert_regular.hpp"

namespace sblab {

namespace r0line {

// On [0, q_m] the r0-line has v = r0/q + (1 - r0)/q_m; the first-order bid
// sits at q_b = alpha r0 / v, which is below q_m whenever v >= v_m.

double payment(double v, double q_m, double r0, double alpha) {
    const double tail = r0 > 0.0 ? r0 * std::log(q_m * v / (alpha * r0)) : 0.0;
    return alpha * (1.0 - std::log(q_m) + tail);
}

double utility(double v, double q_m, double r0, double alpha) {
    return v - alpha * r0 - payment(v, q_m, r0, alpha);
}

double bid(double v, double q_m, double r0, double alpha) { return v / alpha + (1.0 - r0) / q_m; }

double quantile(double v, double q_m, double r0) {
    if (v <= 1.0 / q_m) return std::min(1.0, 1.0 / v);
    return r0 / (v - (1.0 - r0) / q_m);
}

double v_star(double q_m, double r0, double alpha) {
    if (!(q_m > 0.0 && q_m <= 1.0 && r0 >= 0.0 && r0 <= 1.0))
        throw std::invalid_argument("r0line: need q_m in (0,1], r0 in [0,1]");
    if (r0 == 0.0) return alpha * (1.0 - std::log(q_m));
    // U rises on (alpha r0, inf) and is negative at alpha r0.
    const double lo = alpha * r0;
    double hi = std::max(2.0 * lo, 1.0 / q_m);
    while (utility(hi, q_m, r0, alpha) <= 0.0) hi *= 2.0;
    const auto f = [&](double v) { return utility(v, q_m, r0, alpha); };
    return find_root(f, Bracket::make(f, lo, hi), 1e-14);
}

double tau(double q_m, double r0, double alpha) {
    const double vs = v_star(q_m, r0, alpha);
    return (vs - alpha * r0) * quantile(vs, q_m, r0);
}

}  // namespace r0line

double branch_a_bound(double q_m, double alpha) {
    if (!(q_m > 0.0 && q_m <= 1.0)) throw std::invalid_argument("branch_a_bound: q_m in (0,1]");
    if (q_m == 1.0) return alpha;
    return -alpha * std::log(q_m) * q_m / (1.0 - q_m);
}

LargeBoxBound large_box_bound(const LargeBox& b, double alpha) {
    if (!(b.qm_lo > 0.0 && b.qm_lo <= b.qm_hi && b.qm_hi <= 1.0 && 0.0 <= b.r0_lo &&
          b.r0_lo <= b.r0_hi && b.r0_hi <= 1.0))
        throw std::invalid_argument("large_box_bound: malformed box");
    // U falls in r0 where q_m v >= alpha r0; for v >= 1/qm_hi that needs this.
    if (b.qm_lo < alpha * b.r0_hi * b.qm_hi)
        throw std::invalid_argument("large_box_bound: box too wide in q_m");
    LargeBoxBound out;
    // U rises in q_m and v and falls in r0: the worst corner decides S.
    if (r0line::utility(1.0 / b.qm_hi, b.qm_lo, b.r0_hi, alpha) > 0.0) {
        out.excluded = true;
        return out;
    }
    const double vs_lo = std::max(r0line::v_star(b.qm_hi, b.r0_lo, alpha), 1.0 / b.qm_hi);
    const double vs_hi = r0line::v_star(b.qm_lo, b.r0_hi, alpha);
    const double p = std::max(0.0, vs_lo - alpha * b.r0_hi);
    const double denom = vs_hi - (1.0 - b.r0_hi) / b.qm_hi;
    out.tau = denom > 0.0 ? p * b.r0_lo / denom : 0.0;
    return out;
}

CertReport verify_regular_large(double alpha, const RegularGridConfig& g, double target) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    if (g.branch_a_steps < 1 || g.large_qm_cells < 2 || g.large_r0_cells < 1 || g.large_max_depth < 0)
        throw std::invalid_argument("large-regime grid sizes must be positive");
    const auto t0 = std::chrono::steady_clock::now();

    // Branch A: the closed form increases in q_m, so each cell's minimum is
    // at its left node; the sweep also checks that monotonicity.
    double a_min = kInf, a_arg = 0.0;
    bool a_monotone = true;
    double prev = -kInf;
    for (int i = 0; i <= g.branch_a_steps; ++i) {
        const double q = kQmSplit + (1.0 - kQmSplit) * i / g.branch_a_steps;
        const double b = branch_a_bound(q, alpha);
        a_monotone = a_monotone && b >= prev;
        prev = b;
        if (b < a_min) {
            a_min = b;
            a_arg = q;
        }
    }

    struct Leaf {
        LargeBox box{};
        double tau = kInf;
    };
    struct CellOut {
        Leaf worst;
        std::size_t leaves = 0, excluded = 0, failing = 0;
    };
    const int nq = g.large_qm_cells, nr = g.large_r0_cells;
    std::vector<CellOut> out(static_cast<std::size_t>(nq) * nr);
    auto qm_at = [&](int i) { return i == nq ? 1.0 : kQmSplit + (1.0 - kQmSplit) * i / nq; };

    parallel_for(out.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / nr, j = static_cast<int>(idx) % nr;
        const LargeBox root{qm_at(i), qm_at(i + 1), static_cast<double>(j) / nr,
                            j + 1 == nr ? 1.0 : static_cast<double>(j + 1) / nr};
        CellOut c;
        if (!g.certified) {
            // Node mode: the r0-line point value at the box's lower-left node.
            const double qm = root.qm_lo, r0 = root.r0_lo;
            ++c.leaves;
            if (r0 == 0.0 || r0line::utility(1.0 / qm, qm, r0, alpha) > 0.0) {
                ++c.excluded;
            } else {
                c.worst = {LargeBox{qm, qm, r0, r0}, r0line::tau(qm, r0, alpha)};
                if (c.worst.tau < target) ++c.failing;
            }
            // The top edge q_m = 1 and r0 = 1 need their own nodes.
            for (auto [q2, r2] : {std::pair{root.qm_hi, root.r0_lo}, std::pair{root.qm_lo, root.r0_hi},
                                  std::pair{root.qm_hi, root.r0_hi}}) {
                if (!((q2 == 1.0 && i + 1 == nq) || (r2 == 1.0 && j + 1 == nr))) continue;
                if (r2 == 0.0 || r0line::utility(1.0 / q2, q2, r2, alpha) > 0.0) continue;
                const double t = r0line::tau(q2, r2, alpha);
                if (t < c.worst.tau) c.worst = {LargeBox{q2, q2, r2, r2}, t};
            }
            out[idx] = c;
            return;
        }
        struct Item {
            LargeBox box;
            int depth;
        };
        std::vector<Item> stack{{root, 0}};
        while (!stack.empty()) {
            const Item it = stack.back();
            stack.pop_back();
            const LargeBoxBound bb = large_box_bound(it.box, alpha);
            if (bb.excluded) {
                ++c.leaves;
                ++c.excluded;
                continue;
            }
            if (bb.tau < target + g.large_refine_margin && it.depth < g.large_max_depth) {
                const double qmid = 0.5 * (it.box.qm_lo + it.box.qm_hi);
                const double rmid = 0.5 * (it.box.r0_lo + it.box.r0_hi);
                const LargeBox& b = it.box;
                stack.push_back({{qmid, b.qm_hi, rmid, b.r0_hi}, it.depth + 1});
                stack.push_back({{b.qm_lo, qmid, rmid, b.r0_hi}, it.depth + 1});
                stack.push_back({{qmid, b.qm_hi, b.r0_lo, rmid}, it.depth + 1});
                stack.push_back({{b.qm_lo, qmid, b.r0_lo, rmid}, it.depth + 1});
                continue;
            }
            ++c.leaves;
            if (bb.tau < target) ++c.failing;
            if (bb.tau < c.worst.tau) c.worst = {it.box, bb.tau};
        }
        out[idx] = c;
    });

    CertReport rep;
    rep.name = "regular_large";
    rep.alpha = alpha;
    rep.target = target;
    rep.certified = g.certified;
    const CellOut* worst = nullptr;
    std::size_t excluded = 0, failing = 0;
    for (const CellOut& c : out) {
        rep.cells += c.leaves;
        excluded += c.excluded;
        failing += c.failing;
        if (!worst || c.worst.tau < worst->worst.tau) worst = &c;
    }
    const double b_min = worst->worst.tau;
    rep.cells += static_cast<std::size_t>(g.branch_a_steps) + 1;
    rep.min_bound = std::min(a_min, b_min);
    if (a_min <= b_min) {
        rep.argmin = {{"branch", "A"}, {"q_m", a_arg}};
    } else {
        const LargeBox& b = worst->worst.box;
        rep.argmin = {{"branch", "B"}, {"q_m", {b.qm_lo, b.qm_hi}}, {"r0", {b.r0_lo, b.r0_hi}}};
    }
    rep.pass = rep.min_bound >= target && a_monotone;
    rep.details = {{"branch_minima", {{"A", a_min}, {"B", b_min}}},
                   {"branch_a_monotone", a_monotone},
                   {"excluded_boxes", excluded},
                   {"failing_boxes", failing},
                   {"max_depth", g.large_max_depth},
                   {"refine_margin", g.large_refine_margin}};
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace sblab
