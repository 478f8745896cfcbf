#include <immintrin.h>

#include <cmath>

#include "levy/kernels.hpp"

namespace levy::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

// Two complex numbers per register, interleaved (re, im, re, im).
void cmul_v(cplx* a, const cplx* m, std::size_t n) {
    auto* pa = reinterpret_cast<double*>(a);
    const auto* pm = reinterpret_cast<const double*>(m);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d x = _mm256_loadu_pd(pa + 2 * i);
        __m256d y = _mm256_loadu_pd(pm + 2 * i);
        __m256d yr = _mm256_movedup_pd(y);
        __m256d yi = _mm256_permute_pd(y, 0xF);
        __m256d xs = _mm256_permute_pd(x, 0x5);
        __m256d r = _mm256_fmaddsub_pd(x, yr, _mm256_mul_pd(xs, yi));
        _mm256_storeu_pd(pa + 2 * i, r);
    }
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double mr = m[i].real(), mi = m[i].imag();
        a[i] = cplx(ar * mr - ai * mi, ar * mi + ai * mr);
    }
}

void rmul_v(cplx* a, const double* m, std::size_t n) {
    auto* pa = reinterpret_cast<double*>(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d x = _mm256_loadu_pd(pa + 2 * i);
        __m256d s = _mm256_set_pd(m[i + 1], m[i + 1], m[i], m[i]);
        _mm256_storeu_pd(pa + 2 * i, _mm256_mul_pd(x, s));
    }
    for (; i < n; ++i) a[i] = cplx(a[i].real() * m[i], a[i].imag() * m[i]);
}

double real_part_scaled_v(const cplx* in, double* out, std::size_t n, double scale) {
    const auto* p = reinterpret_cast<const double*>(in);
    const __m256d sc = _mm256_set1_pd(scale);
    __m256d worst = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_loadu_pd(p + 2 * i);
        __m256d b = _mm256_loadu_pd(p + 2 * i + 4);
        // a = (r0 i0 r1 i1), b = (r2 i2 r3 i3)
        __m256d re = _mm256_unpacklo_pd(a, b);
        __m256d im = _mm256_unpackhi_pd(a, b);
        re = _mm256_permute4x64_pd(re, 0xD8);
        im = _mm256_permute4x64_pd(im, 0xD8);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(re, sc));
        worst = _mm256_max_pd(worst, _mm256_and_pd(_mm256_mul_pd(im, sc), abs_mask));
    }
    double w = hmax(worst);
    for (; i < n; ++i) {
        out[i] = in[i].real() * scale;
        w = std::fmax(w, std::fabs(in[i].imag() * scale));
    }
    return w;
}

double sum_abs_v(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_loadu_pd(x + i), abs_mask));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

double sum_sq_v(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double sum_pow4_v(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d q = _mm256_mul_pd(v, v);
        acc = _mm256_fmadd_pd(q, q, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double q = x[i] * x[i];
        s += q * q;
    }
    return s;
}

double sum_abs_diff_v(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_and_pd(d, abs_mask));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

double max_abs_v(const double* x, std::size_t n) {
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_and_pd(_mm256_loadu_pd(x + i), abs_mask));
    double r = hmax(m);
    for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
    return r;
}

void axpy_v(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

const Table table = {cmul_v, rmul_v, real_part_scaled_v, sum_abs_v, sum_sq_v,
                     sum_pow4_v, sum_abs_diff_v, max_abs_v, axpy_v};

}  // namespace

const Table* avx2_table() { return &table; }

}  // namespace levy::kernels
