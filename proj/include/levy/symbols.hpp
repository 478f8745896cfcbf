#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "levy/lattice.hpp"
#include "levy/measures.hpp"
#include "levy/orv.hpp"

namespace levy {

enum class SymbolKind { Full, Truncated, Fractional, Bessel };
const char* symbol_kind_name(SymbolKind k);

struct SymbolField {
    FrequencyGrid grid;
    std::vector<cplx> values;
    SymbolKind kind = SymbolKind::Full;
    std::uint64_t measure_hash = 0;
    bool symmetric = false;
    std::string description;

    std::uint64_t hash() const;
};

// Pointwise characteristic exponent of a measure, optionally restricted to |y| <= r_cut.
class SymbolEvaluator {
public:
    explicit SymbolEvaluator(const LevyMeasure& m, double r_cut = std::numeric_limits<double>::infinity());
    cplx operator()(const double* xi) const;
    int dim() const { return dim_; }

private:
    struct Direction {
        double z[3];
        double even, odd;  // s(z) + s(-z), s(z) - s(-z)
    };
    struct Term {
        double lo, hi, coef, beta;
        bool compensated;
        int kernel;
    };
    int dim_;
    bool closed_form_ = false;
    double closed_coef_ = 0.0, sigma_ = 1.0;
    bool symmetric_ = true;
    std::vector<Term> terms_;
    std::vector<std::vector<Direction>> directions_;
};

// -scale (2 pi)^sigma \int_0^inf(1-cos u)u^{-1-sigma}du \int_S |z_1|^sigma dS
double stable_symbol_constant(int dim, double sigma);

SymbolField compute_symbol(const LevyMeasure& m, const FrequencyGrid& grid);
// integration over |y| <= 1 of the measure as given (pass nu~_R)
SymbolField truncated_symbol(const LevyMeasure& scaled, const FrequencyGrid& grid);
SymbolField fractional_symbol(const SymbolField& s, double delta, double imag_tol = 1e-10);
SymbolField bessel_symbol(const SymbolField& s, double order, double imag_tol = 1e-10);

struct NondegeneracyReport {
    double value = 0.0;  // min over sampled (R, direction)
    double max_value = 0.0;
    std::vector<double> R, per_R;  // per_R: min over directions
    // sufficient condition: c0 * 2 \int_0^1 s [w(R)/w(Rs) - 1] ds
    double c0 = 0.0;
    std::vector<double> route2_per_R;
    double route2_value = 0.0;
    double r1_below_one_fraction = 0.0, r2_below_one_fraction = 0.0;
};
NondegeneracyReport nondegeneracy_B(const LevyMeasure& m, const std::vector<double>& R_grid,
                                    const std::vector<double>& directions);

struct TwoSidedBounds {
    std::vector<double> xi, ratio;  // (-Re psi(xi)) w(1/|xi|)
    double c2 = 0.0, C1 = 0.0;
};
TwoSidedBounds symbol_two_sided_bounds(const LevyMeasure& m, const Profile& w, const std::vector<double>& xi_norms,
                                       const std::vector<double>& direction = {});

struct DecayFit {
    double kappa = 0.0;      // fitted exponent of -Re psi^{R,0}
    double c_fit = 0.0;      // min (-Re psi)/|xi|^kappa
    double kappa_ref = 0.0;  // exponent supplied by the caller
    double c_ref = 0.0;      // min (-Re psi)/|xi|^kappa_ref
};
// -Re psi^{R,0}(xi) over |xi| in [xi_lo, xi_hi] along a direction
DecayFit fit_truncated_decay(const LevyMeasure& scaled, double kappa_ref, double xi_lo = 1.0, double xi_hi = 64.0,
                             int points = 61, const std::vector<double>& direction = {});

}  // namespace levy
