#include <arm_neon.h>

#include <cmath>

#include "levy/kernels.hpp"

namespace levy::kernels {
namespace {

void cmul_n(cplx* a, const cplx* m, std::size_t n) {
    auto* pa = reinterpret_cast<double*>(a);
    const auto* pm = reinterpret_cast<const double*>(m);
    for (std::size_t i = 0; i < n; ++i) {
        float64x2_t x = vld1q_f64(pa + 2 * i);
        float64x2_t y = vld1q_f64(pm + 2 * i);
        float64x2_t yr = vdupq_laneq_f64(y, 0);
        float64x2_t yi = vdupq_laneq_f64(y, 1);
        float64x2_t xs = vextq_f64(x, x, 1);
        float64x2_t t = vmulq_f64(xs, yi);
        t = vsetq_lane_f64(-vgetq_lane_f64(t, 0), t, 0);
        vst1q_f64(pa + 2 * i, vfmaq_f64(t, x, yr));
    }
}

void rmul_n(cplx* a, const double* m, std::size_t n) {
    auto* pa = reinterpret_cast<double*>(a);
    for (std::size_t i = 0; i < n; ++i) vst1q_f64(pa + 2 * i, vmulq_n_f64(vld1q_f64(pa + 2 * i), m[i]));
}

double real_part_scaled_n(const cplx* in, double* out, std::size_t n, double scale) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = in[i].real() * scale;
        w = std::fmax(w, std::fabs(in[i].imag() * scale));
    }
    return w;
}

double sum_abs_n(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

double sum_sq_n(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        acc = vfmaq_f64(acc, v, v);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double sum_pow4_n(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        float64x2_t q = vmulq_f64(v, v);
        acc = vfmaq_f64(acc, q, q);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double q = x[i] * x[i];
        s += q * q;
    }
    return s;
}

double sum_abs_diff_n(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

double max_abs_n(const double* x, std::size_t n) {
    float64x2_t m = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(x + i)));
    double r = vmaxvq_f64(m);
    for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
    return r;
}

void axpy_n(double a, const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), a));
    for (; i < n; ++i) y[i] += a * x[i];
}

const Table table = {cmul_n, rmul_n, real_part_scaled_n, sum_abs_n, sum_sq_n,
                     sum_pow4_n, sum_abs_diff_n, max_abs_n, axpy_n};

}  // namespace

const Table* neon_table() { return &table; }

}  // namespace levy::kernels
