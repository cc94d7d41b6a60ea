// AVX2+FMA variants. Compiled with -mavx2 -mfma on x86-64 only; selected at
// runtime after a CPU probe. Semantics match the scalar reference within a
// few ulp (reductions re-associate, tanh uses a polynomial split instead of
// libm) — see test_kernels.cpp for the pinned equivalence bounds.

#include "vst/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace vst::kernels::avx2 {

namespace {

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// exp(x) for x in [-750, 0]: Cody-Waite range reduction against ln2 and a
// degree-11 polynomial on [-ln2/2, ln2/2] (coefficients fitted to < 3.2e-18
// absolute error), scaled by 2^n through the exponent bits.
inline __m256d exp_pd(__m256d x)
{
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

    x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));

    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    const double c[] = {
        0.99999999999999999693,  0.99999999999999999976,
        0.50000000000000183855,  0.16666666666666680806,
        0.041666666666488095495, 0.0083333333333196006109,
        0.0013888888952314774652, 0.00019841269890047113707,
        0.000024801485482328492419, 2.7557240918578969823e-6,
        2.7632639639041029749e-7, 2.5110037605963777712e-8,
    };
    __m256d p = _mm256_set1_pd(c[11]);
    for (int i = 10; i >= 0; --i)
        p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[i]));

    __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    __m256i expo = _mm256_slli_epi64(
        _mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(expo));
}

// tanh(x): odd polynomial on |x| < 0.625 (degree-10 fit in x^2, < 5e-17
// relative), 1 - 2w/(1+w) with w = exp(-2|x|) elsewhere.
inline __m256d tanh_pd(__m256d x)
{
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d sign = _mm256_and_pd(x, sign_mask);
    __m256d ax = _mm256_andnot_pd(sign_mask, x);

    // small branch
    const double q[] = {
        -0.33333333333333322565,  0.13333333333326657736,
        -0.053968253961395570821, 0.021869488260559114645,
        -0.0088632298309257087457, 0.0035920589774734553151,
        -0.001455309297534642025, 0.00058743728600943818973,
        -0.000230776162695198579, 0.000079599557352648080002,
        -0.000017244874494844330172,
    };
    __m256d z = _mm256_mul_pd(x, x);
    __m256d pq = _mm256_set1_pd(q[10]);
    for (int i = 9; i >= 0; --i)
        pq = _mm256_fmadd_pd(pq, z, _mm256_set1_pd(q[i]));
    __m256d t_small = _mm256_fmadd_pd(_mm256_mul_pd(x, z), pq, x);

    // large branch
    __m256d w = exp_pd(_mm256_mul_pd(ax, _mm256_set1_pd(-2.0)));
    __m256d one = _mm256_set1_pd(1.0);
    __m256d t_large = _mm256_sub_pd(
        one, _mm256_div_pd(_mm256_add_pd(w, w), _mm256_add_pd(one, w)));
    t_large = _mm256_or_pd(t_large, sign);

    __m256d small_mask =
        _mm256_cmp_pd(ax, _mm256_set1_pd(0.625), _CMP_LT_OQ);
    return _mm256_blendv_pd(t_large, t_small, small_mask);
}

double dot(const double* a, const double* b, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                              acc);
    double s = hsum(acc);
    for (; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

void matvec_bias(const double* W, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols)
{
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot(W + r * cols, x, cols) + b[r];
}

void axpy(double a, const double* x, double* y, std::size_t n)
{
    __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(
            y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                   _mm256_loadu_pd(y + i)));
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void matvec_t_acc(const double* W, const double* v, double* y,
                  std::size_t rows, std::size_t cols)
{
    for (std::size_t r = 0; r < rows; ++r)
        axpy(v[r], W + r * cols, y, cols);
}

void outer_acc(double* A, const double* u, const double* v, std::size_t rows,
               std::size_t cols)
{
    for (std::size_t r = 0; r < rows; ++r)
        axpy(u[r], v, A + r * cols, cols);
}

void tanh_vec(const double* x, double* y, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, tanh_pd(_mm256_loadu_pd(x + i)));
    if (i < n) {
        double in[4] = {0.0, 0.0, 0.0, 0.0};
        double out[4];
        std::memcpy(in, x + i, (n - i) * sizeof(double));
        _mm256_storeu_pd(out, tanh_pd(_mm256_loadu_pd(in)));
        std::memcpy(y + i, out, (n - i) * sizeof(double));
    }
}

void tanh_bwd(const double* t, const double* dy, double* dx, std::size_t n)
{
    __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d tv = _mm256_loadu_pd(t + i);
        __m256d g = _mm256_fnmadd_pd(tv, tv, one);
        _mm256_storeu_pd(dx + i, _mm256_mul_pd(g, _mm256_loadu_pd(dy + i)));
    }
    for (; i < n; ++i)
        dx[i] = (1.0 - t[i] * t[i]) * dy[i];
}

void rk4_combine(const double* x, const double* k1, const double* k2,
                 const double* k3, const double* k4, double h, double* out,
                 std::size_t n)
{
    const double w = h / 6.0;
    __m256d wv = _mm256_set1_pd(w);
    __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d s = _mm256_add_pd(_mm256_loadu_pd(k2 + i),
                                  _mm256_loadu_pd(k3 + i));
        s = _mm256_fmadd_pd(two, s, _mm256_loadu_pd(k1 + i));
        s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
        _mm256_storeu_pd(out + i,
                         _mm256_fmadd_pd(wv, s, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i)
        out[i] = x[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

double sse(const double* a, const double* b, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                  _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double sse_scaled(const double* a, const double* b, const double* w,
                  std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                  _mm256_loadu_pd(b + i));
        d = _mm256_mul_pd(d, _mm256_loadu_pd(w + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = w[i] * (a[i] - b[i]);
        s += d * d;
    }
    return s;
}

void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2)
{
    __m256d b1 = _mm256_set1_pd(beta1);
    __m256d b2 = _mm256_set1_pd(beta2);
    __m256d ob1 = _mm256_set1_pd(1.0 - beta1);
    __m256d ob2 = _mm256_set1_pd(1.0 - beta2);
    __m256d inv_bc1 = _mm256_set1_pd(1.0 / bc1);
    __m256d inv_bc2 = _mm256_set1_pd(1.0 / bc2);
    __m256d lrv = _mm256_set1_pd(lr);
    __m256d epsv = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + i),
                                     _mm256_mul_pd(ob1, gv));
        __m256d vv = _mm256_fmadd_pd(
            b2, _mm256_loadu_pd(v + i),
            _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        __m256d mhat = _mm256_mul_pd(mv, inv_bc1);
        __m256d vhat = _mm256_mul_pd(vv, inv_bc2);
        __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        __m256d upd = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), den);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void zscore(const double* x, const double* mean, const double* inv_std,
            double* y, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                  _mm256_loadu_pd(mean + i));
        _mm256_storeu_pd(y + i,
                         _mm256_mul_pd(d, _mm256_loadu_pd(inv_std + i)));
    }
    for (; i < n; ++i)
        y[i] = (x[i] - mean[i]) * inv_std[i];
}

} // namespace

} // namespace vst::kernels::avx2

namespace vst::kernels {

const Ops* avx2_ops()
{
    static const Ops ops = {
        "avx2",
        avx2::dot,
        avx2::matvec_bias,
        avx2::matvec_t_acc,
        avx2::outer_acc,
        avx2::tanh_vec,
        avx2::tanh_bwd,
        avx2::axpy,
        avx2::rk4_combine,
        avx2::sse,
        avx2::sse_scaled,
        avx2::adam_update,
        avx2::zscore,
    };
    return &ops;
}

} // namespace vst::kernels

#endif // x86-64
