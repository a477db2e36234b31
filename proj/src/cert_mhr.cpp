// SPDX-License-Identifier: Apache-2.0
#include "sblab/cert_mhr.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sblab/mhr_kernel.hpp"
#include "sblab/numerics.hpp"

namespace sblab {

const char* to_string(MhrCase c) {
    return c == MhrCase::below_reserve ? "below_reserve" : "above_reserve";
}

double quantile_envelope_mhr(double v1, double q1, double v2, double q2, double v) {
    if (!(v1 > v2)) throw std::invalid_argument("quantile_envelope_mhr: needs v1 > v2");
    if (!(q1 <= q2) || !(v >= v2))
        throw std::invalid_argument("quantile_envelope_mhr: needs q1 <= q2 and v >= v2");
    return q2 * std::exp((v - v2) / (v1 - v2) * std::log(q1 / q2));
}

double welfare_lb(double q_m) {
    if (!(q_m > 0.0 && q_m <= 1.0)) throw std::invalid_argument("welfare_lb: q_m in (0,1]");
    if (q_m == 1.0) return 1.0;
    return (q_m - 1.0) / (q_m * std::log1p(q_m - 1.0));
}

MhrCell cell_revenue_lb(double q_m, double w, double alpha) {
    MhrCell c;
    c.q_m = q_m;
    c.w = w;
    c.which = (alpha * w <= 1.0 / q_m) ? MhrCase::below_reserve : MhrCase::above_reserve;
    c.cert_revenue_lb = kernel::node_bound(q_m, w, alpha);
    return c;
}

MhrGridConfig mhr_grid(const std::string& scale) {
    MhrGridConfig g;
    if (scale == "coarse") {
        g.q_step = 1e-2;
        g.w_step = 1e-2;
    } else if (scale == "fine") {
        g.q_step = 2.5e-4;
        g.w_step = 2.5e-4;
    } else if (scale != "default") {
        throw std::invalid_argument("grid scale must be coarse, default or fine");
    }
    return g;
}

namespace {

double case2_bound(double q, double w, double alpha) {
    const double vm = 1.0 / q;
    return alpha * w * q * std::exp((alpha * w - vm) / (w - vm) * (-1.0 - std::log(q)));
}

}  // namespace

CertReport verify_mhr(double alpha, const MhrGridConfig& g, double target) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
    if (!(g.q_lo > 0.0 && g.q_lo < g.q_hi && g.q_hi <= 1.0 && g.q_step > 0.0 && g.w_step > 0.0))
        throw std::invalid_argument("MHR grid must cover a sub-interval of (0,1] with positive steps");
    const auto t0 = std::chrono::steady_clock::now();
    const kernel::Isa isa = kernel::active_isa();
    const auto node_fn = kernel::node_row(isa);
    const auto box_fn = kernel::box_row(isa);

    // Node mode: uniform q nodes, w nodes w_step apart. Certified mode: cells
    // with relative q width q_step and w width w_step * v_m, so the box bounds
    // stay tight where v_m is large.
    std::vector<double> q_edges;
    if (g.certified) {
        for (double q = g.q_lo; q < g.q_hi; q = std::min(g.q_hi, q * (1.0 + g.q_step)))
            q_edges.push_back(q);
        q_edges.push_back(g.q_hi);
    } else {
        const int n_q = static_cast<int>(std::llround((g.q_hi - g.q_lo) / g.q_step));
        const Grid1D qgrid{g.q_lo, g.q_hi, n_q};
        for (std::size_t i = 0; i < qgrid.size(); ++i) q_edges.push_back(qgrid.node(i));
    }
    const std::size_t rows = g.certified ? q_edges.size() - 1 : q_edges.size();

    struct Row {
        double value = HUGE_VAL;
        double q_lo = 0, q_hi = 0, w_lo = 0, w_hi = 0;
        std::size_t count = 0;
        bool tail_increasing = true;
    };
    std::vector<Row> out(rows);
    parallel_for(rows, [&](std::size_t i) {
        Row r;
        const double q_lo = q_edges[i];
        const double q_hi = g.certified ? q_edges[i + 1] : q_lo;
        // welfare_lb falls in q, so the cell's feasible w starts at q_hi.
        const double w0 = welfare_lb(q_hi);
        const double w_end = std::max(w0, 1.0 / (alpha * q_lo)) + g.w_span;
        const double dw = g.certified ? g.w_step / q_hi : g.w_step;
        const auto n_w = static_cast<std::size_t>(std::ceil((w_end - w0) / dw));
        kernel::RowMin m;
        if (g.certified) {
            m = box_fn(q_lo, q_hi, w0, dw, n_w, alpha);
            r.w_lo = w0 + static_cast<double>(m.index) * dw;
            r.w_hi = r.w_lo + dw;
        } else {
            m = node_fn(q_lo, w0, dw, n_w + 1, alpha);
            r.w_lo = r.w_hi = w0 + static_cast<double>(m.index) * dw;
        }
        r.value = m.value;
        r.q_lo = q_lo;
        r.q_hi = q_hi;
        r.count = g.certified ? n_w : n_w + 1;
        // Beyond the truncation only case 2 applies; check it still rises.
        const double w_top = w0 + static_cast<double>(n_w) * dw;
        const double h = 1e-4 * w_top;
        for (double q : {q_lo, q_hi})
            if (alpha * w_top > 1.0 / q &&
                !(case2_bound(q, w_top + h, alpha) > case2_bound(q, w_top, alpha)))
                r.tail_increasing = false;
        out[i] = r;
    });

    CertReport rep;
    rep.name = "mhr";
    rep.alpha = alpha;
    rep.target = target;
    rep.certified = g.certified;
    rep.min_bound = HUGE_VAL;
    bool tail_ok = true;
    const Row* best = nullptr;
    for (const Row& r : out) {
        rep.cells += r.count;
        tail_ok = tail_ok && r.tail_increasing;
        if (!best || r.value < best->value) best = &r;
    }
    rep.min_bound = best->value;
    const double q_mid = 0.5 * (best->q_lo + best->q_hi), w_mid = 0.5 * (best->w_lo + best->w_hi);
    rep.argmin = {{"q_m", {best->q_lo, best->q_hi}},
                  {"w", {best->w_lo, best->w_hi}},
                  {"case", to_string(cell_revenue_lb(q_mid, w_mid, alpha).which)}};
    rep.pass = rep.min_bound >= target && tail_ok;
    rep.details = {{"isa", kernel::isa_name(isa)},
                   {"q_m_range", {g.q_lo, g.q_hi}},
                   {"q_step", g.q_step},
                   {"w_step", g.w_step},
                   {"w_span", g.w_span},
                   {"tail_monotone", tail_ok},
                   {"implied_ratio_ub", 1.0 / rep.min_bound}};
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace sblab
