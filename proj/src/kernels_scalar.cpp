#include <cmath>

#include "levy/kernels.hpp"

namespace levy::kernels {
namespace {

void cmul_s(cplx* a, const cplx* m, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double mr = m[i].real(), mi = m[i].imag();
        a[i] = cplx(ar * mr - ai * mi, ar * mi + ai * mr);
    }
}

void rmul_s(cplx* a, const double* m, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] = cplx(a[i].real() * m[i], a[i].imag() * m[i]);
}

double real_part_scaled_s(const cplx* in, double* out, std::size_t n, double scale) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = in[i].real() * scale;
        worst = std::fmax(worst, std::fabs(in[i].imag() * scale));
    }
    return worst;
}

double sum_abs_s(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

double sum_sq_s(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double sum_pow4_s(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double q = x[i] * x[i];
        s += q * q;
    }
    return s;
}

double sum_abs_diff_s(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

double max_abs_s(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
    return m;
}

void axpy_s(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

const Table table = {cmul_s, rmul_s, real_part_scaled_s, sum_abs_s, sum_sq_s,
                     sum_pow4_s, sum_abs_diff_s, max_abs_s, axpy_s};

}  // namespace

const Table& scalar_table() { return table; }

}  // namespace levy::kernels
