// SPDX-License-Identifier: Apache-2.0
#include "sblab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sblab/numerics.hpp"

namespace sblab {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void require(bool ok, const std::string& what) {
    if (!ok) throw SpecError(what);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

std::string family_name(const DistributionSpec& spec) {
    struct Visitor {
        std::string operator()(const TruncExp&) const { return "trunc_exp"; }
        std::string operator()(const ShiftedPareto&) const { return "shifted_pareto"; }
        std::string operator()(const Uniform&) const { return "uniform"; }
        std::string operator()(const R0Line&) const { return "r0_line"; }
        std::string operator()(const Pentagon&) const { return "pentagon"; }
        std::string operator()(const Triangle&) const { return "triangle"; }
        std::string operator()(const PiecewiseLinearConcave&) const {
            return "piecewise_linear_concave";
        }
        std::string operator()(const ShiftedExp&) const { return "shifted_exp"; }
    };
    return std::visit(Visitor{}, spec);
}

// ---- Piece --------------------------------------------------------------

double Piece::value(double q) const {
    if (q <= 0.0) {
        if (A > 0.0 || D > 0.0) return kInf;
        return B;
    }
    double v = B + C * q;
    if (A != 0.0) v += A / q;
    if (D != 0.0) v -= D * std::log(q);
    return v;
}

double Piece::revenue(double q) const {
    return A + B * q + C * q * q - D * xlogx(q);
}

double Piece::marginal(double q) const {
    double m = B + 2.0 * C * q;
    if (D != 0.0) m -= D * (q > 0.0 ? std::log(q) + 1.0 : -kInf);
    return m;
}

double Piece::value_integral(double a, double b) const {
    if (b <= a) return 0.0;
    double s = B * (b - a) + 0.5 * C * (b * b - a * a);
    if (A != 0.0) s += (a > 0.0) ? A * std::log(b / a) : kInf;
    if (D != 0.0) s -= D * ((xlogx(b) - b) - (xlogx(a) - a));
    return s;
}

// ---- RevenueCurve -------------------------------------------------------

RevenueCurve::RevenueCurve(std::vector<Piece> pieces, double q_m, std::string label)
    : pieces_(std::move(pieces)), q_m_(q_m), label_(std::move(label)) {
    if (pieces_.empty()) throw SpecError("curve needs at least one piece");
    if (pieces_.front().q0 != 0.0 || pieces_.back().q1 != 1.0)
        throw SpecError("pieces must cover [0, 1]");
    for (std::size_t i = 1; i < pieces_.size(); ++i)
        if (pieces_[i].q0 != pieces_[i - 1].q1) throw SpecError("pieces must be contiguous");
}

std::size_t RevenueCurve::piece_index(double q) const {
    // First piece whose right end is at or beyond q.
    std::size_t lo = 0, hi = pieces_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (pieces_[mid].q1 < q) lo = mid + 1;
        else hi = mid;
    }
    return lo;
}

double RevenueCurve::value(double q) const {
    if (q <= 0.0) return pieces_.front().value(0.0);
    return pieces_[piece_index(q)].value(q);
}

double RevenueCurve::revenue(double q) const {
    if (q <= 0.0) return pieces_.front().revenue(0.0);
    return pieces_[piece_index(q)].revenue(q);
}

Subgradient RevenueCurve::marginal(double q) const {
    const std::size_t k = piece_index(q);
    const Piece& p = pieces_[k];
    Subgradient s{p.marginal(q), p.marginal(q)};
    if (q == p.q1 && k + 1 < pieces_.size()) s.plus = pieces_[k + 1].marginal(q);
    if (q == p.q0 && k > 0) s.minus = pieces_[k - 1].marginal(q);
    return s;
}

double RevenueCurve::value_tail(double q) const {
    double total = 0.0;
    for (const Piece& p : pieces_) {
        if (p.q1 <= q) continue;
        total += p.value_integral(std::max(p.q0, q), p.q1);
    }
    return total;
}

double RevenueCurve::top_value() const { return pieces_.front().value(0.0); }

double RevenueCurve::quantile(double v) const {
    if (v >= top_value()) return 0.0;
    for (const Piece& p : pieces_) {
        if (p.value(p.q1) > v) continue;
        // Crossing lies in (q0, q1]; value(q0) > v by continuity.
        if (p.flat()) return p.q0;
        double q = -1.0;
        if (p.D == 0.0) {
            // C q^2 + (B - v) q + A = 0
            const double a2 = p.C, b1 = p.B - v, c0 = p.A;
            if (a2 == 0.0) {
                if (b1 != 0.0) q = -c0 / b1;
            } else {
                const double disc = b1 * b1 - 4.0 * a2 * c0;
                if (disc >= 0.0) {
                    const double sq = std::sqrt(disc);
                    const double t = -0.5 * (b1 + std::copysign(sq, b1));
                    const double r1 = t / a2;
                    const double r2 = (t != 0.0) ? c0 / t : r1;
                    const double tol = 1e-12;
                    if (r1 >= p.q0 - tol && r1 <= p.q1 + tol) q = r1;
                    else if (r2 >= p.q0 - tol && r2 <= p.q1 + tol) q = r2;
                }
            }
        } else if (p.A == 0.0 && p.C == 0.0) {
            q = std::exp((p.B - v) / p.D);
        }
        if (!(q >= p.q0 - 1e-12 && q <= p.q1 + 1e-12)) {
            const double lo = std::max(p.q0, 1e-300);
            auto f = [&](double x) { return p.value(x) - v; };
            if (f(lo) <= 0.0) return p.q0;
            q = find_root(f, Bracket::make(f, lo, p.q1), 1e-15);
        }
        return std::clamp(q, p.q0, p.q1);
    }
    return 1.0;
}

RevenueCurve RevenueCurve::scaled(double rho) const {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw SpecError("scale factor must be positive");
    std::vector<Piece> ps = pieces_;
    for (Piece& p : ps) {
        p.A *= rho;
        p.B *= rho;
        p.C *= rho;
        p.D *= rho;
    }
    return RevenueCurve(std::move(ps), q_m_, label_);
}

// ---- builders -----------------------------------------------------------

namespace {

Piece linear_revenue_piece(double q0, double q1, double r0, double r1) {
    // R linear through (q0, r0) and (q1, r1): R = A + B q.
    const double slope = (r1 - r0) / (q1 - q0);
    Piece p;
    p.q0 = q0;
    p.q1 = q1;
    p.A = r0 - slope * q0;
    p.B = slope;
    return p;
}

/// Largest-revenue point of a piecewise curve: the left end of the maximizing
/// interval unless that is 0, then its right end.
double locate_monopoly(const std::vector<Piece>& ps) {
    std::vector<double> cand;
    for (const Piece& p : ps) {
        cand.push_back(p.q0);
        cand.push_back(p.q1);
        double s = -1.0;
        if (p.D == 0.0 && p.C != 0.0) s = -p.B / (2.0 * p.C);
        else if (p.D != 0.0 && p.C == 0.0) s = std::exp(p.B / p.D - 1.0);
        if (s > p.q0 && s < p.q1) cand.push_back(s);
    }
    RevenueCurve tmp(ps, 1.0, "");
    double best = -kInf;
    for (double q : cand) best = std::max(best, tmp.revenue(q));
    const double tol = 1e-12 * std::max(1.0, std::fabs(best));
    double lo = kInf, hi = -kInf;
    for (double q : cand) {
        if (tmp.revenue(q) >= best - tol) {
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
    }
    return lo > 0.0 ? lo : hi;
}

RevenueCurve build_one(const TruncExp& s) {
    require(s.T > 0.0 && std::isfinite(s.T), "trunc_exp: T > 0");
    const double qa = std::exp(-s.T);
    Piece atom;
    atom.q0 = 0.0;
    atom.q1 = qa;
    atom.B = s.T;
    Piece tail;
    tail.q0 = qa;
    tail.q1 = 1.0;
    tail.D = 1.0;
    const double q_m = (s.T <= 1.0) ? qa : std::exp(-1.0);
    return RevenueCurve({atom, tail}, q_m, "trunc_exp(" + fmt(s.T) + ")");
}

RevenueCurve build_one(const ShiftedPareto& s) {
    require(s.c > 0.0, "shifted_pareto: c > 0");
    require(s.a >= 0.0, "shifted_pareto: a >= 0");
    Piece p;
    p.A = s.c;
    p.B = s.a;
    return RevenueCurve({p}, 1.0, "shifted_pareto(" + fmt(s.c) + "," + fmt(s.a) + ")");
}

RevenueCurve build_one(const Uniform& s) {
    require(s.l >= 0.0 && s.l < s.h, "uniform: 0 <= l < h");
    Piece p;
    p.B = s.h;
    p.C = -(s.h - s.l);
    const double q_m = std::min(1.0, s.h / (2.0 * (s.h - s.l)));
    return RevenueCurve({p}, q_m, "uniform(" + fmt(s.l) + "," + fmt(s.h) + ")");
}

RevenueCurve build_one(const R0Line& s) {
    require(s.r0 >= 0.0 && s.r0 <= 1.0, "r0_line: r0 in [0,1]");
    require(s.q_m > 0.0 && s.q_m <= 1.0, "r0_line: q_m in (0,1]");
    std::vector<Piece> ps{linear_revenue_piece(0.0, s.q_m, s.r0, 1.0)};
    if (s.q_m < 1.0) ps.push_back(linear_revenue_piece(s.q_m, 1.0, 1.0, 1.0));
    return RevenueCurve(std::move(ps), s.q_m, "r0_line(" + fmt(s.r0) + "," + fmt(s.q_m) + ")");
}

RevenueCurve build_one(const Pentagon& s) {
    require(s.q_m > 0.0 && s.q_m <= s.q_k && s.q_k <= 1.0, "pentagon: 0 < q_m <= q_k <= 1");
    const double rk_min = (s.q_m < 1.0) ? (1.0 - s.q_k) / (1.0 - s.q_m) : 0.0;
    require(s.r_k >= rk_min - 1e-12 && s.r_k <= 1.0,
            "pentagon: r_k in [(1-q_k)/(1-q_m), 1]");
    std::vector<Piece> ps{linear_revenue_piece(0.0, s.q_m, 1.0, 1.0)};
    if (s.q_k > s.q_m) ps.push_back(linear_revenue_piece(s.q_m, s.q_k, 1.0, s.r_k));
    if (s.q_k < 1.0) ps.push_back(linear_revenue_piece(s.q_k, 1.0, s.r_k, 0.0));
    return RevenueCurve(std::move(ps), s.q_m,
                        "pentagon(" + fmt(s.q_m) + "," + fmt(s.q_k) + "," + fmt(s.r_k) + ")");
}

RevenueCurve build_one(const Triangle& s) {
    require(s.q_m > 0.0 && s.q_m <= 1.0, "triangle: q_m in (0,1]");
    std::vector<Piece> ps{linear_revenue_piece(0.0, s.q_m, 0.0, 1.0)};
    if (s.q_m < 1.0) ps.push_back(linear_revenue_piece(s.q_m, 1.0, 1.0, 0.0));
    return RevenueCurve(std::move(ps), s.q_m, "triangle(" + fmt(s.q_m) + ")");
}

RevenueCurve build_one(const PiecewiseLinearConcave& s) {
    const auto& pts = s.points;
    require(pts.size() >= 2, "piecewise_linear_concave: at least two points");
    require(pts.front().first == 0.0 && pts.back().first == 1.0,
            "piecewise_linear_concave: quantiles must start at 0 and end at 1");
    std::vector<Piece> ps;
    double prev_slope = kInf;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto [q0, r0] = pts[i];
        const auto [q1, r1] = pts[i + 1];
        require(q1 > q0, "piecewise_linear_concave: quantiles strictly increasing");
        require(r0 >= 0.0 && r1 >= 0.0, "piecewise_linear_concave: revenue non-negative");
        const double slope = (r1 - r0) / (q1 - q0);
        require(slope <= prev_slope + 1e-12, "piecewise_linear_concave: R must be concave");
        prev_slope = slope;
        ps.push_back(linear_revenue_piece(q0, q1, r0, r1));
    }
    require(ps.front().A >= 0.0, "piecewise_linear_concave: R(0) >= 0");
    const double q_m = locate_monopoly(ps);
    return RevenueCurve(std::move(ps), q_m, "piecewise_linear_concave");
}

RevenueCurve build_one(const ShiftedExp& s) {
    require(s.lambda > 0.0 && std::isfinite(s.lambda), "shifted_exp: lambda > 0");
    require(s.a >= 0.0, "shifted_exp: a >= 0");
    Piece p;
    p.B = s.a;
    p.D = 1.0 / s.lambda;
    const double q_m = std::min(1.0, std::exp(s.a * s.lambda - 1.0));
    return RevenueCurve({p}, q_m, "shifted_exp(" + fmt(s.a) + "," + fmt(s.lambda) + ")");
}

}  // namespace

RevenueCurve build(const DistributionSpec& spec) {
    return std::visit([](const auto& s) { return build_one(s); }, spec);
}

double expected_value(const RevenueCurve& curve) { return curve.expected_value(); }

RevenueCurve scale(const RevenueCurve& curve, double rho) { return curve.scaled(rho); }

RevenueCurve normalize(const RevenueCurve& curve) {
    return curve.scaled(1.0 / curve.monopoly_revenue());
}

// ---- validation ---------------------------------------------------------

ValidationReport validate(const RevenueCurve& curve, CurveClass cls) {
    ValidationReport rep;
    constexpr int kN = 2000;
    if (cls == CurveClass::regular) {
        std::vector<double> r(kN + 1);
        double scale_r = 0.0;
        for (int i = 0; i <= kN; ++i) {
            r[i] = curve.revenue(static_cast<double>(i) / kN);
            scale_r = std::max(scale_r, std::fabs(r[i]));
        }
        const double tol = 1e-10 * std::max(1.0, scale_r);
        for (int i = 1; i < kN; ++i)
            if (r[i] < 0.5 * (r[i - 1] + r[i + 1]) - tol)
                rep.violations.push_back(static_cast<double>(i) / kN);
    } else {
        const double v_lo = curve.bottom_value();
        double v_hi = curve.top_value();
        if (!std::isfinite(v_hi)) v_hi = curve.value(1e-6);
        // Grid stops short of the top so an atom there is not read as a jump.
        std::vector<double> vs(kN), lq(kN);
        for (int i = 0; i < kN; ++i) {
            vs[i] = v_lo + (v_hi - v_lo) * static_cast<double>(i) / kN;
            lq[i] = std::log(curve.quantile(vs[i]));
        }
        for (int i = 1; i + 1 < kN; ++i) {
            if (!std::isfinite(lq[i + 1])) break;
            const double tol = 1e-9 * std::max(1.0, std::fabs(lq[i]));
            if (lq[i] < 0.5 * (lq[i - 1] + lq[i + 1]) - tol) rep.violations.push_back(vs[i]);
        }
    }
    rep.ok = rep.violations.empty();
    return rep;
}

SmallRegimeDiagnostics small_regime_diagnostics(const RevenueCurve& normalized, double alpha) {
    SmallRegimeDiagnostics d;
    d.q_m = normalized.q_m();
    d.q_pp = normalized.quantile(normalized.v_m() / alpha);
    d.w = 0.0;
    for (const Piece& p : normalized.pieces()) {
        const double a = std::max(p.q0, d.q_pp), b = std::min(p.q1, d.q_m);
        if (b > a) d.w += p.value_integral(a, b);
    }
    return d;
}

}  // namespace sblab
