#pragma once

#include <complex>
#include <cstddef>

// Pointwise and reduction loops shared by the spectral and norm code. Each has a
// scalar reference and a vector variant; the variant is selected once at runtime
// (CPU feature probe, overridable with LEVY_SIMD=scalar).
namespace levy::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2, Neon };

struct Table {
    void (*cmul)(cplx* a, const cplx* m, std::size_t n);
    void (*rmul)(cplx* a, const double* m, std::size_t n);
    double (*real_part_scaled)(const cplx* in, double* out, std::size_t n, double scale);
    double (*sum_abs)(const double* x, std::size_t n);
    double (*sum_sq)(const double* x, std::size_t n);
    double (*sum_pow4)(const double* x, std::size_t n);
    double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const Table& scalar_table();
const Table* avx2_table();
const Table* neon_table();

Isa active_isa();
const char* isa_name(Isa isa);
// Overrides the dispatch choice; returns false if the ISA is unavailable.
bool select_isa(Isa isa);
const Table& active();

inline void cmul(cplx* a, const cplx* m, std::size_t n) { active().cmul(a, m, n); }
inline void rmul(cplx* a, const double* m, std::size_t n) { active().rmul(a, m, n); }
inline double real_part_scaled(const cplx* in, double* out, std::size_t n, double scale) {
    return active().real_part_scaled(in, out, n, scale);
}
inline double sum_abs(const double* x, std::size_t n) { return active().sum_abs(x, n); }
inline double sum_sq(const double* x, std::size_t n) { return active().sum_sq(x, n); }
inline double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    return active().sum_abs_diff(a, b, n);
}
inline double max_abs(const double* x, std::size_t n) { return active().max_abs(x, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }

// sum |x|^p; p in {1, 2, 4} use the vector table, other exponents the scalar pow loop.
double sum_abs_pow(const double* x, std::size_t n, double p);

}  // namespace levy::kernels
