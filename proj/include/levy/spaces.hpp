#pragma once

#include <string>
#include <vector>

#include "levy/lattice.hpp"
#include "levy/orv.hpp"
#include "levy/symbols.hpp"

namespace levy {

// Base-N Littlewood-Paley system on a frequency grid. phi(xi) = theta(log_N |xi|) / sum_k theta(log_N |xi| - k)
// with theta(u) = exp(-1/(1 - u^2)); block j >= 1 is phi(N^{-j} xi), block 0 takes the rest.
class DyadicSystem {
public:
    DyadicSystem(int N, const FrequencyGrid& grid);

    int base() const { return N_; }
    const FrequencyGrid& grid() const { return grid_; }
    int j_max() const { return j_max_; }            // last block meeting the lattice
    int j_resolved() const { return j_resolved_; }  // last block whose annulus fits inside the extent
    int blocks() const { return j_max_ + 1; }
    const std::vector<double>& block(int j) const { return blocks_.at(j); }
    std::vector<double> fattened(int j) const;

    // phi(xi) for the annulus profile, and sum_{j in Z} phi(N^{-j} xi)
    static double profile(int N, double xi_norm);
    static double partition_sum(int N, double xi_norm);

private:
    int N_;
    FrequencyGrid grid_;
    int j_max_ = 0, j_resolved_ = 0;
    std::vector<std::vector<double>> blocks_;
};

// Lattice function with an optional mark axis: one channel per mark z_i with weight Pi_i.
// An unmarked function has one channel and no weights.
struct MarkedField {
    Lattice lattice;
    std::vector<std::vector<double>> channels;
    std::vector<double> weights;

    static MarkedField unmarked(const Lattice& lat, std::vector<double> f);
    bool marked() const { return !weights.empty(); }
};

struct NormSpec {
    double s = 0.0;
    double p = 2.0;
    double q = 0.0;  // Besov summation exponent; 0 means q = p
    double r = 0.0;  // mark exponent of V_r; 0 for unmarked fields
    Profile w;       // weights w(N^{-j})^{-s}
};

std::vector<double> lp_project(const Lattice& lat, const std::vector<double>& f, const DyadicSystem& sys, int j);
// all blocks of one channel at once
std::vector<std::vector<double>> lp_blocks(const Lattice& lat, const std::vector<double>& f, const DyadicSystem& sys);

struct NormResult {
    std::string kind;
    double value = 0.0;
    double truncation_fraction = 0.0;  // energy in blocks past j_resolved
    std::vector<std::string> warnings;
};

NormResult besov_norm(const MarkedField& f, const DyadicSystem& sys, const NormSpec& spec);
NormResult bessel_norm(const MarkedField& f, const DyadicSystem& sys, const NormSpec& spec);
// ||F^{-1} (1 - psi_sym)^s F f||_{L_p(V_r)}; sym_symbol is the symbol of the symmetrized measure
NormResult bessel_norm_via_J(const MarkedField& f, const SymbolField& sym_symbol, const NormSpec& spec);
// J^t f
MarkedField apply_J(const MarkedField& f, const SymbolField& sym_symbol, double t);

std::string norm_json(const NormResult& r, const NormSpec& spec, int N);

struct EquivalenceReport {
    std::vector<double> ratios;        // bessel_norm / bessel_norm_via_J per family member
    std::vector<double> besov_ratios;  // besov_norm / bessel_norm_via_J
    double min = 0.0, max = 0.0, band = 0.0;
    double besov_band = 0.0;
    double max_truncation = 0.0;
};
EquivalenceReport norm_equivalence_check(const std::vector<MarkedField>& family, const DyadicSystem& sys,
                                         const NormSpec& spec, const SymbolField& sym_symbol);

// sum_{j <= n} P_j Phi, restricted to the first n marks
MarkedField approximate_input(const MarkedField& phi, int n, const DyadicSystem& sys);

// exp(-pi |x|^2 / l^2) on the lattice
std::vector<double> gaussian(const Lattice& lat, double l);

}  // namespace levy
