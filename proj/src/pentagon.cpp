// SPDX-License-Identifier: Apache-2.0
// Pentagon-family bid lower bounds for the small monopoly-quantile analysis.
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "sblab/cert_regular.hpp"
#include "sblab/sample_bid.hpp"

namespace sblab {

namespace {

/// Pieces of the pentagon R = 1 on [0, qm], linear to (qk, rk), then
/// rk (1-q)/(1-qk). Returns the piece count written into `out`.
std::size_t pentagon_pieces(double qm, double qk, double rk, std::array<Piece, 3>& out) {
    std::size_t n = 0;
    out[n++] = Piece{0.0, qm, 1.0, 0.0, 0.0, 0.0};
    if (qk > qm) {
        const double s = (rk - 1.0) / (qk - qm);
        out[n++] = Piece{qm, qk, 1.0 - s * qm, s, 0.0, 0.0};
    }
    if (qk < 1.0) {
        const double a = rk / (1.0 - qk);
        out[n++] = Piece{qk, 1.0, a, -a, 0.0, 0.0};
    }
    return n;
}

double pentagon_value(const std::array<Piece, 3>& ps, std::size_t n, double q) {
    for (std::size_t k = 0; k < n; ++k)
        if (q <= ps[k].q1) return ps[k].value(q);
    return ps[n - 1].value(q);
}

/// Lowest best-response bid of the value at each quantile qs[0..n) over the
/// (q_k, r_k) grid of pentagons with monopoly quantile qmp. qs ascending, >= qmp.
void min_bids_for_monopoly(double qmp, const double* qs, std::size_t n, const PentagonGrid& g,
                           double alpha, double* out) {
    std::fill(out, out + n, kInf);
    std::array<Piece, 3> ps;
    const int nk = std::max(g.n_k, 2);
    const int nr = std::max(g.n_r, 2);
    for (int a = 0; a < nk; ++a) {
        const double qk = (a == nk - 1) ? 1.0 : qmp + (1.0 - qmp) * a / (nk - 1);
        const double rmin = (qk >= 1.0) ? 0.0 : (1.0 - qk) / (1.0 - qmp);
        const int rn = (qk >= 1.0 || rmin >= 1.0) ? 1 : nr;
        for (int b = 0; b < rn; ++b) {
            const double rk = (rn == 1) ? rmin : rmin + (1.0 - rmin) * b / (nr - 1);
            const std::size_t np = pentagon_pieces(qmp, qk, rk, ps);
            const std::span<const Piece> span(ps.data(), np);
            for (std::size_t i = 0; i < n; ++i) {
                const double v = pentagon_value(ps, np, qs[i]);
                const BestResponse br = best_response(v, span, alpha);
                out[i] = std::min(out[i], br.top ? kInf : br.bid);
            }
        }
    }
}

}  // namespace

double pentagon_bid_lb(double q, const std::vector<double>& qm_nodes, const PentagonGrid& grid,
                       double alpha) {
    double best = kInf;
    for (double qmp : qm_nodes) {
        if (!(qmp > 0.0 && qmp <= q)) throw std::invalid_argument("pentagon_bid_lb: need 0 < q_m' <= q");
        if (qmp >= 1.0) continue;  // no pentagon has its monopoly quantile at 1
        double b;
        min_bids_for_monopoly(qmp, &q, 1, grid, alpha, &b);
        best = std::min(best, b);
    }
    return q >= 1.0 ? 0.0 : best;
}

double pentagon_bid_lb(double q, double q_m, const PentagonGrid& grid, int n_qm, double alpha) {
    if (!(q_m > 0.0 && q_m <= q && q <= 1.0))
        throw std::invalid_argument("pentagon_bid_lb: need 0 < q_m <= q <= 1");
    std::vector<double> nodes;
    const int n = std::max(n_qm, 1);
    for (int i = 0; i < n; ++i) nodes.push_back(n == 1 ? q_m : q_m + (q - q_m) * i / (n - 1));
    return pentagon_bid_lb(q, nodes, grid, alpha);
}

BidLowerBoundTable::BidLowerBoundTable(std::vector<double> nodes, const PentagonGrid& grid,
                                       double alpha)
    : nodes_(std::move(nodes)) {
    if (nodes_.empty() || !std::is_sorted(nodes_.begin(), nodes_.end()) || nodes_.front() <= 0.0 ||
        nodes_.back() > 1.0)
        throw std::invalid_argument("BidLowerBoundTable: nodes must be ascending in (0, 1]");
    const std::size_t n = nodes_.size();
    tab_.assign(n * (n + 1) / 2, kInf);
    // f[i][j]: pentagons with monopoly quantile exactly Q_j, at quantile Q_i.
    parallel_for(n, [&](std::size_t j) {
        if (nodes_[j] >= 1.0) return;
        std::vector<double> col(n - j);
        min_bids_for_monopoly(nodes_[j], nodes_.data() + j, n - j, grid, alpha, col.data());
        for (std::size_t i = j; i < n; ++i) tab_[i * (i + 1) / 2 + j] = col[i - j];
    });
    for (std::size_t i = 0; i < n; ++i) {
        double* row = tab_.data() + i * (i + 1) / 2;
        if (nodes_[i] >= 1.0) {
            std::fill(row, row + i + 1, 0.0);  // the value at q = 1 is 0 on every pentagon
            continue;
        }
        for (std::size_t j = i; j-- > 0;) row[j] = std::min(row[j], row[j + 1]);
    }
}

bool revenue_monotone_check(const RevenueCurve& r1, const RevenueCurve& r2, double q_dagger,
                            double v, double alpha, int n_bids) {
    if (!(q_dagger > 0.0 && q_dagger < 1.0))
        throw std::invalid_argument("revenue_monotone_check: q_dagger in (0,1)");
    if (std::abs(r1.revenue(q_dagger) - r2.revenue(q_dagger)) > 1e-9)
        throw std::invalid_argument("revenue_monotone_check: curves must agree at q_dagger");
    for (int i = 1; i <= 200; ++i) {
        const double q = q_dagger * i / 200.0;
        if (r1.revenue(q) > r2.revenue(q) + 1e-9)
            throw std::invalid_argument("revenue_monotone_check: need r1 <= r2 below q_dagger");
    }
    // Bids above b_dagger correspond to quantiles in (0, q_dagger).
    auto gain = [&](const RevenueCurve& r, double q) {
        return utility(v, Bid::at(r.value(q)), r, alpha) -
               utility(v, Bid::at(r.value(q_dagger)), r, alpha);
    };
    bool prefers1 = true;
    for (int i = 1; i < n_bids; ++i) {
        const double q = q_dagger * i / n_bids;
        prefers1 = prefers1 && gain(r1, q) <= 1e-12;
    }
    if (!prefers1) return true;  // premise not met; nothing to transfer
    for (int i = 1; i < n_bids; ++i) {
        const double q = q_dagger * i / n_bids;
        if (gain(r2, q) > 1e-9) return false;
    }
    return true;
}

}  // namespace sblab
