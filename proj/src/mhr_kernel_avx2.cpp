// SPDX-License-Identifier: Apache-2.0
// AVX2+FMA variants of the MHR row kernels. This file alone is compiled with
// -mavx2 -mfma; callers go through the dispatcher in mhr_kernel.cpp.
#include "sblab/mhr_kernel.hpp"

#include <cmath>

#if defined(SBLAB_HAVE_AVX2) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace sblab::kernel {

namespace {

/// exp on 4 lanes: 2^n * P(r) with r = x - n ln2, |r| <= ln2/2 and a
/// degree-13 Taylor polynomial (truncation below 1e-17 relative).
inline __m256d exp256(__m256d x) {
    x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));  // NaN lanes become -708
    x = _mm256_min_pd(x, _mm256_set1_pd(708.0));
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

    static constexpr double kInvFact[] = {
        1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
        1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
        1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
        1.0,                1.0};
    __m256d p = _mm256_set1_pd(kInvFact[0]);
    for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));

    const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
    const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                        _mm256_castpd_si256(magic));
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

inline __m256d lane_index(std::size_t k) {
    const double b = static_cast<double>(k);
    return _mm256_setr_pd(b, b + 1.0, b + 2.0, b + 3.0);
}

struct Tracker {
    __m256d best = _mm256_set1_pd(HUGE_VAL);
    __m256d idx = _mm256_setzero_pd();

    void update(__m256d b, __m256d k) {
        const __m256d lt = _mm256_cmp_pd(b, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, b, lt);
        idx = _mm256_blendv_pd(idx, k, lt);
    }

    RowMin reduce() const {
        alignas(32) double v[4], i[4];
        _mm256_store_pd(v, best);
        _mm256_store_pd(i, idx);
        RowMin r{HUGE_VAL, 0};
        for (int l = 0; l < 4; ++l) {
            const auto li = static_cast<std::size_t>(i[l]);
            if (v[l] < r.value || (v[l] == r.value && li < r.index)) r = {v[l], li};
        }
        return r;
    }
};

RowMin node_row_avx2_impl(double q_m, double w0, double dw, std::size_t n, double alpha) {
    const double lnq = std::log(q_m);
    const __m256d va = _mm256_set1_pd(alpha), vq = _mm256_set1_pd(q_m);
    const __m256d vvm = _mm256_set1_pd(1.0 / q_m);
    const __m256d vqlnq = _mm256_set1_pd(q_m * lnq);
    const __m256d vL = _mm256_set1_pd(-1.0 - lnq);
    const __m256d vw0 = _mm256_set1_pd(w0), vdw = _mm256_set1_pd(dw);

    Tracker tr;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d kk = lane_index(k);
        const __m256d w = _mm256_add_pd(vw0, _mm256_mul_pd(kk, vdw));
        const __m256d aw = _mm256_mul_pd(va, w);
        const __m256d c1 = _mm256_cmp_pd(aw, vvm, _CMP_LE_OQ);
        const __m256d t = _mm256_div_pd(_mm256_sub_pd(aw, vvm), _mm256_sub_pd(w, vvm));
        const __m256d arg = _mm256_blendv_pd(_mm256_mul_pd(t, vL), _mm256_mul_pd(aw, vqlnq), c1);
        const __m256d pre = _mm256_blendv_pd(_mm256_mul_pd(aw, vq), aw, c1);
        tr.update(_mm256_mul_pd(pre, exp256(arg)), kk);
    }
    RowMin r = tr.reduce();
    for (; k < n; ++k) {
        const double b = node_bound(q_m, w0 + static_cast<double>(k) * dw, alpha);
        if (b < r.value) r = {b, k};
    }
    return r;
}

RowMin box_row_avx2_impl(double q_lo, double q_hi, double w0, double dw, std::size_t n,
                         double alpha) {
    const double qs = std::fmin(std::fmax(std::exp(-1.0), q_lo), q_hi);
    const double m = qs * std::log(qs);
    const double v_hi = 1.0 / q_lo, v_lo = 1.0 / q_hi;
    const double L_lo = -1.0 - std::log(q_hi), L_hi = -1.0 - std::log(q_lo);

    const __m256d va = _mm256_set1_pd(alpha), vm = _mm256_set1_pd(m);
    const __m256d vvhi = _mm256_set1_pd(v_hi), vvlo = _mm256_set1_pd(v_lo);
    const __m256d vLlo = _mm256_set1_pd(L_lo), vLhi = _mm256_set1_pd(L_hi);
    const __m256d wcap1 = _mm256_set1_pd(1.0 / (alpha * q_lo));
    const __m256d wfloor2 = _mm256_set1_pd(v_lo / alpha);
    const __m256d vqlo = _mm256_set1_pd(q_lo);
    const __m256d inf = _mm256_set1_pd(HUGE_VAL), zero = _mm256_setzero_pd();
    const __m256d vw0 = _mm256_set1_pd(w0), vdw = _mm256_set1_pd(dw);
    const __m256d one = _mm256_set1_pd(1.0);

    Tracker tr;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d kk = lane_index(k);
        const __m256d wl = _mm256_add_pd(vw0, _mm256_mul_pd(kk, vdw));
        const __m256d wh = _mm256_add_pd(vw0, _mm256_mul_pd(_mm256_add_pd(kk, one), vdw));
        const __m256d awl = _mm256_mul_pd(va, wl), awh = _mm256_mul_pd(va, wh);

        const __m256d c1 = _mm256_cmp_pd(awl, vvhi, _CMP_LE_OQ);
        const __m256d wtop = _mm256_min_pd(wh, wcap1);
        __m256d b1 = _mm256_mul_pd(awl, exp256(_mm256_mul_pd(_mm256_mul_pd(va, wtop), vm)));
        b1 = _mm256_blendv_pd(inf, b1, c1);

        const __m256d c2 = _mm256_cmp_pd(awh, vvlo, _CMP_GT_OQ);
        const __m256d tlo_raw = _mm256_div_pd(_mm256_sub_pd(awl, vvhi), _mm256_sub_pd(wl, vvhi));
        const __m256d tlo =
            _mm256_blendv_pd(zero, tlo_raw, _mm256_cmp_pd(awl, vvhi, _CMP_GT_OQ));
        const __m256d thi = _mm256_div_pd(_mm256_sub_pd(awh, vvlo), _mm256_sub_pd(wh, vvlo));
        const __m256d e = _mm256_min_pd(
            _mm256_min_pd(_mm256_mul_pd(tlo, vLlo), _mm256_mul_pd(tlo, vLhi)),
            _mm256_min_pd(_mm256_mul_pd(thi, vLlo), _mm256_mul_pd(thi, vLhi)));
        const __m256d w2 = _mm256_max_pd(wl, wfloor2);
        __m256d b2 = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(va, w2), vqlo), exp256(e));
        b2 = _mm256_blendv_pd(inf, b2, c2);

        tr.update(_mm256_min_pd(b1, b2), kk);
    }
    RowMin r = tr.reduce();
    for (; k < n; ++k) {
        const double lo = w0 + static_cast<double>(k) * dw;
        const double hi = w0 + static_cast<double>(k + 1) * dw;
        const double b = box_bound(q_lo, q_hi, lo, hi, alpha);
        if (b < r.value) r = {b, k};
    }
    return r;
}

bool cpu_ok() {
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
}

}  // namespace

NodeRowFn node_row_avx2() { return cpu_ok() ? &node_row_avx2_impl : nullptr; }
BoxRowFn box_row_avx2() { return cpu_ok() ? &box_row_avx2_impl : nullptr; }

}  // namespace sblab::kernel

#else

namespace sblab::kernel {
NodeRowFn node_row_avx2() { return nullptr; }
BoxRowFn box_row_avx2() { return nullptr; }
}  // namespace sblab::kernel

#endif
