// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sblab {

// ---- distribution specs -------------------------------------------------

/// Survival e^{-v} on [0, T) with an atom of mass e^{-T} at T.
struct TruncExp { double T = 1.0; };
/// Survival c / (v - a) on [a + c, inf).
struct ShiftedPareto { double c = 1.0; double a = 0.0; };
struct Uniform { double l = 0.0; double h = 1.0; };
/// R = r0 + (1 - r0) q / q_m below q_m, 1 above.
struct R0Line { double r0 = 0.0; double q_m = 1.0; };
/// R = 1 on [0, q_m], linear to (q_k, r_k), then r_k (1 - q) / (1 - q_k).
struct Pentagon { double q_m = 0.5; double q_k = 0.5; double r_k = 1.0; };
struct Triangle { double q_m = 0.5; };
/// Vertices (q, R(q)) of a concave revenue curve, q from 0 to 1.
struct PiecewiseLinearConcave { std::vector<std::pair<double, double>> points; };
/// Shifted exponential: value a + Exp(lambda), so v(q) = a - ln(q) / lambda.
struct ShiftedExp { double a = 0.0; double lambda = 1.0; };

using DistributionSpec = std::variant<TruncExp, ShiftedPareto, Uniform, R0Line, Pentagon,
                                      Triangle, PiecewiseLinearConcave, ShiftedExp>;

std::string family_name(const DistributionSpec& spec);

/// Raised for malformed specs or invariant violations; the message names the
/// violated constraint.
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---- revenue curves -----------------------------------------------------

/// One smooth segment of the value function in quantile space:
///   v(q) = A/q + B + C q - D ln q   on [q0, q1].
/// Every family used here is a concatenation of such pieces.
struct Piece {
    double q0 = 0.0, q1 = 1.0;
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0;

    bool flat() const { return A == 0.0 && C == 0.0 && D == 0.0; }
    double value(double q) const;
    double revenue(double q) const;
    double marginal(double q) const;
    /// Integral of v over [a, b] inside the piece (inf if A > 0 and a == 0).
    double value_integral(double a, double b) const;
};

struct Subgradient {
    double plus = 0.0;   ///< right derivative R'_+(q)
    double minus = 0.0;  ///< left derivative R'_-(q)
};

class RevenueCurve {
public:
    RevenueCurve() = default;
    RevenueCurve(std::vector<Piece> pieces, double q_m, std::string label);

    const std::vector<Piece>& pieces() const { return pieces_; }
    const std::string& label() const { return label_; }

    double q_m() const { return q_m_; }
    double v_m() const { return value(q_m_); }
    double monopoly_revenue() const { return revenue(q_m_); }
    /// Smallest quantile with positive revenue; the top of the support sits
    /// at quantile 0 for every family here.
    double support_top_quantile() const { return 0.0; }

    double value(double q) const;
    double revenue(double q) const;
    Subgradient marginal(double q) const;
    /// Integral of v over [q, 1].
    double value_tail(double q) const;
    double expected_value() const { return value_tail(0.0); }
    /// Pr[value > v].
    double quantile(double v) const;
    double top_value() const;
    double bottom_value() const { return value(1.0); }

    RevenueCurve scaled(double rho) const;

private:
    std::size_t piece_index(double q) const;

    std::vector<Piece> pieces_;
    double q_m_ = 1.0;
    std::string label_;
};

RevenueCurve build(const DistributionSpec& spec);
double expected_value(const RevenueCurve& curve);
RevenueCurve scale(const RevenueCurve& curve, double rho);
/// Scales so that the monopoly revenue is 1.
RevenueCurve normalize(const RevenueCurve& curve);

enum class CurveClass { regular, mhr };

struct ValidationReport {
    bool ok = true;
    /// Grid points (quantiles for regular, values for mhr) where the check failed.
    std::vector<double> violations;
};

ValidationReport validate(const RevenueCurve& curve, CurveClass cls);

/// Diagnostics used by the small-monopoly-quantile analysis, for a curve
/// normalized to monopoly revenue 1: q'' = q(v_m / 0.7) and
/// w = integral of R(q)/q over [q'', q_m].
struct SmallRegimeDiagnostics {
    double q_m = 0.0;
    double q_pp = 0.0;
    double w = 0.0;
};

SmallRegimeDiagnostics small_regime_diagnostics(const RevenueCurve& normalized,
                                                double alpha = 0.7);

}  // namespace sblab
