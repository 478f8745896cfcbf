#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levy/lattice.hpp"
#include "levy/process.hpp"
#include "levy/symbols.hpp"

namespace levy {

std::vector<double> uniform_time_grid(double T, std::size_t K = 256);

// values[k] is the lattice function at times[k]
struct TimeField {
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    bool empty() const { return values.empty(); }
};

// values[k][i] is Phi(t_k, ., z_i); weights are Pi({z_i})
struct MarkedTimeField {
    std::vector<double> times;
    std::vector<std::vector<std::vector<double>>> values;
    std::vector<double> weights;
    bool empty() const { return values.empty(); }
};

struct InputData {
    Lattice lattice;
    std::vector<double> g;  // empty means 0
    TimeField f;            // empty means 0
    MarkedTimeField Phi;    // empty means 0
    double lambda = 0.0;
    double T = 1.0;
};

// Exponential: exact integral of e^{(psi - lambda)(t - s)} against the piecewise linear interpolant of the
// integrand in time. Trapezoid: composite trapezoid with exact propagation of the left endpoint.
enum class TimeRule { Exponential, Trapezoid };

struct SolutionField {
    Lattice lattice;
    std::vector<double> times;
    std::vector<std::vector<double>> u;
    std::uint64_t noise_hash = 0;
    double lambda = 0.0;
    std::uint64_t hash() const;
};

// T_t^lambda g: multiplier exp(t psi - lambda t). decay_tol < 0 skips the band-limit check.
std::vector<double> semigroup_apply(const SymbolField& psi, double lambda, double t, const std::vector<double>& g,
                                    double decay_tol = 1e-8);
// R_lambda f on f's time grid
TimeField resolvent_apply(const SymbolField& psi, double lambda, const TimeField& f, TimeRule rule = TimeRule::Exponential);
// R~_lambda Phi along one realization of the Poisson measure; Phi at jump times is linear in time between nodes
TimeField stochastic_convolution(const SymbolField& psi, double lambda, const MarkedTimeField& Phi, const JumpSample& jumps,
                                 TimeRule rule = TimeRule::Exponential);

SolutionField solve(const SymbolField& psi, const InputData& in, const JumpSample& jumps, const std::vector<double>& time_grid,
                    TimeRule rule = TimeRule::Exponential);

struct ResidualReport {
    std::vector<double> residual;  // ||r(t_k)||_p per node
    double max_residual = 0.0;
    double p = 2.0;
};
// r(t_k) = u(t_k) - g - trapezoid of (L u - lambda u + f) - (jump sum - trapezoid compensator)
ResidualReport residual_check(const SolutionField& sol, const SymbolField& psi, const InputData& in, const JumpSample& jumps,
                              double p = 2.0);

struct KunitaRow {
    double lambda, scale;
    double lhs;  // E \int_0^T ||R~ Phi(t)||_p^p dt
    double rhs;  // rho^{p/2} \int ||(sum |Phi|^2 Pi)^{1/2}||_p^p dt + rho \int sum ||Phi||_p^p Pi dt
    double ratio;
};
struct KunitaReport {
    double p = 2.0;
    std::vector<KunitaRow> rows;
    double C = 0.0;       // max ratio
    double spread = 0.0;  // max ratio / min ratio
};
KunitaReport kunita_check(const SymbolField& psi, const MarkedTimeField& Phi, const std::vector<double>& lambdas,
                          const std::vector<double>& scales, double p, std::size_t paths, std::uint64_t seed);

// p = inf gives the max norm
double lp_norm(const Lattice& lat, const std::vector<double>& f, double p);

// columns t, ||u(t)||_p
void write_solution_csv_norms(const std::string& path, const SolutionField& sol, double p);

}  // namespace levy
