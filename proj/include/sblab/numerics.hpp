// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sblab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double kRootTol = 1e-12;
inline constexpr double kIntegrateTol = 1e-9;
inline constexpr double kUtilityTol = 1e-9;
inline constexpr double kEdgeInset = 1e-12;

/// Error carrying a short machine-readable code ("no-bracket",
/// "non-finite-integrand", "empty-grid", ...).
class NumericError : public std::runtime_error {
public:
    NumericError(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double f_lo = 0.0;
    double f_hi = 0.0;

    /// Evaluates f at both ends. Throws "no-bracket" unless the signs differ
    /// (a zero at either end counts as a sign change).
    static Bracket make(const std::function<double(double)>& f, double lo, double hi);
};

struct Grid1D {
    double lo = 0.0;
    double hi = 1.0;
    int steps = 1;

    std::size_t size() const { return static_cast<std::size_t>(steps) + 1; }
    double node(std::size_t i) const;
    void check() const;
};

double find_root(const std::function<double(double)>& f, const Bracket& bracket,
                 double tol = kRootTol);

/// Adaptive Simpson on [a, b]. Endpoints are pulled in by `edge` when the
/// integrand is not finite there; any non-finite interior value throws
/// "non-finite-integrand".
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = kIntegrateTol, double edge = kEdgeInset);

struct GridMinResult {
    double value = kInf;
    std::vector<std::size_t> index;
    std::vector<double> point;
};

/// Exact minimum over the tensor grid; ties go to the lowest flat index
/// (last axis fastest).
GridMinResult grid_min(const std::function<double(std::span<const double>)>& g,
                       const std::vector<Grid1D>& grids);

/// Worker count from SBLAB_THREADS (default: hardware concurrency, min 1).
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Results
/// must be written to per-index slots so the caller can reduce in order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sblab
