#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levy/lattice.hpp"
#include "levy/measures.hpp"
#include "levy/orv.hpp"
#include "levy/symbols.hpp"

namespace levy {

struct DensityField {
    Lattice lattice;
    double t = 0.0;
    std::vector<double> values;
    std::uint64_t symbol_hash = 0;
    std::string op = "identity";
    double imag_residue = 0.0;
    double min_value = 0.0;
    std::vector<std::string> warnings;

    double mass() const;
    std::uint64_t hash() const;
};

// Fourier multiplier on a frequency grid, applied to f^ as m(xi) f^(xi).
struct Multiplier {
    std::vector<cplx> values;
    std::string description;
};

Multiplier identity_multiplier(const FrequencyGrid& grid);
// L^pi for pi = plus - minus (minus may be empty)
Multiplier generator_multiplier(const SymbolField& plus);
Multiplier generator_multiplier(const SymbolField& plus, const SymbolField& minus);
// D^k = (i 2 pi xi)^k
Multiplier derivative_multiplier(const FrequencyGrid& grid, const std::vector<int>& k);
// f -> f(. - y)
Multiplier shift_multiplier(const FrequencyGrid& grid, const std::vector<double>& y);
Multiplier compose(const Multiplier& a, const Multiplier& b);
Multiplier combine(double ca, const Multiplier& a, double cb, const Multiplier& b);

// p(t, x) = \int e^{-i 2 pi x.xi} exp(t psi(xi)) dxi on the paired spatial lattice. decay_tol < 0 skips the
// band-limit check.
DensityField density(const SymbolField& psi, double t, double decay_tol = 1e-12);
// F^{-1}[m F p(t, .)]
DensityField apply_operator(const SymbolField& psi, double t, const Multiplier& op, double decay_tol = 1e-12);
// lattice convolution (a * b)(x) = sum_y a(y) b(x - y) h^d
DensityField convolve(const DensityField& a, const DensityField& b);

struct KernelStats {
    double l1 = 0.0;           // \int |K|
    double sup = 0.0;          // max |K|
    double weighted_l1 = 0.0;  // \int (1 + |x|^alpha) |K|
    double tail_l1 = 0.0;      // \int_{|x| > radius} |K|
};
KernelStats kernel_statistics(const DensityField& f, double alpha = 0.0, double radius = 0.0);

struct ScalingRow {
    double t, a;
    double linf, l1;  // relative discrepancies
    std::size_t compared;
};
struct ScalingReport {
    std::vector<ScalingRow> rows;
    double max_linf = 0.0, max_l1 = 0.0;
};
// p(t, x) against a(t)^{-d} p~(1, x / a(t)), p~ the density of nu~_{a(t)} on the same lattice, cubic interpolation.
// delta < 1 compares L^{nu;delta} p with t^{-delta} a^{-d} (L^{nu~;delta} p~)(1, x / a).
ScalingReport scaling_identity_check(const LevyMeasure& m, const GeneralizedInverse& a, const std::vector<double>& t_grid,
                                     const FrequencyGrid& grid, double delta = 1.0);

// tensor cubic Lagrange interpolation of lattice values at x; false if x is too close to the edge
bool interpolate_cubic(const Lattice& lat, const std::vector<double>& v, const double* x, double& out);

struct DecayRow {
    std::vector<int> derivative;
    double R;
    double sup, weighted_l1;
    double sup_refined, weighted_refined;  // on the lattice with twice the extent
};
struct DecayReport {
    std::vector<DecayRow> rows;
    double alpha2 = 0.0;
    double max_sup = 0.0, max_weighted = 0.0;
    double R_spread = 0.0;       // max over derivatives of (max - min)/max across R
    double extent_growth = 0.0;  // max relative growth of the weighted statistic when the extent doubles
};
// sup |D^k p^R(1, .)| and \int (1 + |x|^alpha2)|D^k p^R(1, x)| dx for p^R the density of nu~_R
DecayReport decay_moment_check(const LevyMeasure& m, const FrequencyGrid& grid, double alpha2,
                               const std::vector<std::vector<int>>& derivatives, const std::vector<double>& R_grid);

struct KernelDifference {
    double space_diff = 0.0;  // \int |K(t, x - y) - K(t, x)| dx
    double time_diff = 0.0;   // \int |K(t - s, x) - K(t, x)| dx
};
KernelDifference kernel_difference_statistics(const SymbolField& psi, const Multiplier& op, double t, double s_shift,
                                              const std::vector<double>& y_shift, double decay_tol = 1e-12);

}  // namespace levy
