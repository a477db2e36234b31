// SPDX-License-Identifier: Apache-2.0
#include "sblab/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace sblab {

Bracket Bracket::make(const std::function<double(double)>& f, double lo, double hi) {
    if (!(lo < hi)) throw NumericError("no-bracket", "lo must be below hi");
    Bracket b{lo, hi, f(lo), f(hi)};
    if (std::isnan(b.f_lo) || std::isnan(b.f_hi))
        throw NumericError("no-bracket", "NaN at bracket end");
    if (b.f_lo * b.f_hi > 0.0)
        throw NumericError("no-bracket", "no sign change on [" + std::to_string(lo) + ", " +
                                             std::to_string(hi) + "]");
    return b;
}

double Grid1D::node(std::size_t i) const {
    if (i == 0) return lo;
    if (i >= static_cast<std::size_t>(steps)) return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps);
}

void Grid1D::check() const {
    if (steps <= 0) throw NumericError("empty-grid", "steps must be positive");
    if (!(lo <= hi)) throw NumericError("empty-grid", "lo must not exceed hi");
}

double find_root(const std::function<double(double)>& f, const Bracket& bracket, double tol) {
    if (!(tol > 0.0)) throw NumericError("bad-tolerance", "tol must be positive");
    double a = bracket.lo, b = bracket.hi;
    double fa = bracket.f_lo, fb = bracket.f_hi;
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw NumericError("no-bracket", "bracket ends share a sign");

    // Secant step when it lands well inside the bracket, bisection otherwise.
    // Alternating forced bisections keeps the width shrinking geometrically.
    bool force_bisect = false;
    for (int it = 0; it < 400; ++it) {
        double x;
        if (!force_bisect && std::isfinite(fa) && std::isfinite(fb) && fb != fa) {
            x = b - fb * (b - a) / (fb - fa);
            const double margin = 0.05 * (b - a);
            if (!(x > a + margin && x < b - margin)) x = 0.5 * (a + b);
        } else {
            x = 0.5 * (a + b);
        }
        const double fx = f(x);
        if (std::isnan(fx)) throw NumericError("no-bracket", "NaN inside bracket");
        if (std::fabs(fx) <= tol) return x;
        const double old_width = b - a;
        if ((fa < 0.0) == (fx < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a <= tol) return 0.5 * (a + b);
        force_bisect = (b - a) > 0.5 * old_width;
    }
    return 0.5 * (a + b);
}

namespace {

double checked(const std::function<double(double)>& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y))
        throw NumericError("non-finite-integrand", "f(" + std::to_string(x) + ") is not finite");
    return y;
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double m,
                   double fm, double b, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = checked(f, lm), frm = checked(f, rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::fabs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_rec(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 double edge) {
    if (!(a <= b)) throw NumericError("bad-interval", "integrate needs a <= b");
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b);
    if (!std::isfinite(fa)) {
        a += std::min(edge, 0.25 * (b - a));
        fa = checked(f, a);
    }
    if (!std::isfinite(fb)) {
        b -= std::min(edge, 0.25 * (b - a));
        fb = checked(f, b);
    }
    // A few fixed panels first so narrow features are not skipped by the
    // first Simpson estimate.
    constexpr int kPanels = 8;
    double total = 0.0;
    double x0 = a, f0 = fa;
    for (int i = 1; i <= kPanels; ++i) {
        const double x1 = (i == kPanels) ? b : a + (b - a) * i / kPanels;
        const double f1 = (i == kPanels) ? fb : checked(f, x1);
        const double m = 0.5 * (x0 + x1);
        const double fm = checked(f, m);
        const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += simpson_rec(f, x0, f0, m, fm, x1, f1, whole, tol / kPanels, 40);
        x0 = x1;
        f0 = f1;
    }
    return total;
}

GridMinResult grid_min(const std::function<double(std::span<const double>)>& g,
                       const std::vector<Grid1D>& grids) {
    if (grids.empty()) throw NumericError("empty-grid", "no axes");
    std::size_t total = 1;
    for (const auto& gr : grids) {
        gr.check();
        total *= gr.size();
    }
    const std::size_t dims = grids.size();
    const std::size_t inner = total / grids[0].size();

    // One slot per outer node; the reduction below walks them in order so the
    // answer does not depend on scheduling.
    std::vector<GridMinResult> partial(grids[0].size());
    parallel_for(grids[0].size(), [&](std::size_t i0) {
        GridMinResult best;
        std::vector<std::size_t> idx(dims, 0);
        std::vector<double> pt(dims);
        idx[0] = i0;
        for (std::size_t flat = 0; flat < inner; ++flat) {
            std::size_t rem = flat;
            for (std::size_t d = dims; d-- > 1;) {
                idx[d] = rem % grids[d].size();
                rem /= grids[d].size();
            }
            for (std::size_t d = 0; d < dims; ++d) pt[d] = grids[d].node(idx[d]);
            const double v = g(pt);
            if (v < best.value || best.index.empty()) {
                best.value = v;
                best.index = idx;
                best.point = pt;
            }
        }
        partial[i0] = std::move(best);
    });
    GridMinResult out = partial[0];
    for (std::size_t i = 1; i < partial.size(); ++i)
        if (partial[i].value < out.value) out = partial[i];
    return out;
}

unsigned thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SBLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = static_cast<unsigned>(v);
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace sblab
