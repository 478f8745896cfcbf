#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levy/densities.hpp"
#include "levy/measures.hpp"
#include "levy/rng.hpp"

namespace levy {

// Law of the jumps of size > eps, plus the compensating drift and the covariance of the discarded jumps.
class JumpLaw {
public:
    JumpLaw(const LevyMeasure& m, double eps);

    int dim() const { return dim_; }
    double eps() const { return eps_; }
    double intensity() const { return total_; }           // nu(|y| > eps)
    const std::vector<double>& drift() const { return drift_; }  // \int_{|y|>eps} chi_sigma(y) y nu(dy)
    const std::vector<double>& small_covariance() const { return cov_; }  // \int_{|y|<=eps} y y^T nu(dy), row-major
    double discarded_fraction() const { return discarded_fraction_; }  // trace(cov) / \int_{|y|<=1} |y|^2 nu
    void sample(Stream& rng, double* y) const;
    // L with L L^T = small_covariance
    const std::vector<double>& small_cholesky() const { return chol_; }

private:
    struct Class {
        double a, b, e;  // radial density r^e on [a, b)
        std::size_t kernel;
    };
    int dim_;
    double eps_;
    double total_ = 0.0;
    std::vector<Class> classes_;
    std::vector<double> class_cum_;
    std::vector<double> drift_, cov_, chol_;
    double discarded_fraction_ = 0.0;
    std::vector<AngularKernel> kernels_;
    std::vector<std::vector<double>> kernel_cum_;
};

struct JumpSample {
    double T = 0.0;
    int dim = 0;
    std::vector<double> times;        // increasing in (0, T]
    std::vector<double> jumps;        // dim values per jump (Levy jumps)
    std::vector<std::size_t> marks;   // mark index per point (Poisson measures)
    double intensity = 0.0;
    bool compensated = false;
};

struct PathOptions {
    double T = 1.0;
    double eps = 1e-2;
    std::size_t time_nodes = 256;  // uniform intervals on [0, T]
    bool brownian = false;         // Gaussian proxy for the jumps below eps
};

struct PathSample {
    int dim = 0;
    std::vector<double> times;   // time_nodes + 1 nodes
    std::vector<double> values;  // dim per node
    JumpSample jumps;
    double eps = 0.0;
    std::vector<double> drift;
    bool brownian = false;
    double discarded_fraction = 0.0;
    std::vector<std::string> warnings;

    const double* at(std::size_t k) const { return values.data() + k * dim; }
    // Z at an arbitrary time from the jump list and the drift (no Brownian part)
    std::vector<double> jump_part(double t) const;
};

// one path; replicas draw from Stream(seed, replica, levy_path)
PathSample simulate_levy_path(const LevyMeasure& m, const PathOptions& opt, Stream& rng);
PathSample simulate_levy_path(const LevyMeasure& m, const PathOptions& opt, std::uint64_t seed, std::uint64_t replica = 0);

// Z_T only; uses the same draws as simulate_levy_path would for the jumps
void levy_increment(const JumpLaw& law, double T, bool brownian, Stream& rng, double* out);
// n x dim terminal values, replica i from Stream(seed, i, levy_path)
std::vector<double> simulate_terminal_values(const LevyMeasure& m, double T, double eps, std::size_t n,
                                             std::uint64_t seed, bool brownian = false);
// as above, but Z_T is the sum of the increments over [0, T/2] and (T/2, T] from the split child streams
std::vector<double> simulate_terminal_values_split(const LevyMeasure& m, double T, double eps, std::size_t n,
                                                   std::uint64_t seed, bool brownian = false);

// finite intensity Pi on marks 0..n-1
struct MarkIntensity {
    std::vector<double> weights;
    double total() const;
};
JumpSample simulate_poisson_measure(const MarkIntensity& pi, double T, Stream& rng);
JumpSample simulate_poisson_measure(const MarkIntensity& pi, double T, std::uint64_t seed, std::uint64_t replica = 0);
// sum_i h(z_i) - T \int h dPi
double compensated_sum(const JumpSample& s, const MarkIntensity& pi, const std::vector<double>& h);

struct ECFPoint {
    double xi;
    cplx empirical, exact;
    double se;  // standard error of the real and imaginary parts (max)
    bool within(double k = 3.0) const;
};
// empirical E exp(i 2 pi xi Z) along axis 0 against exp(psi(xi))
std::vector<ECFPoint> empirical_characteristic(const std::vector<double>& values, int dim,
                                               const std::vector<double>& xi, const std::vector<cplx>& exact);

struct DensityCheck {
    std::size_t n = 0;
    std::vector<double> distance;  // per axis
    double max_distance = 0.0;
    double band = 0.0;  // 1.5 * 1.36 / sqrt(n)
    bool pass = false;
};
// KS distance between per-axis marginal empirical CDFs and the lattice CDFs of the field
DensityCheck empirical_density_check(const std::vector<double>& values, const DensityField& field,
                                     std::size_t min_samples = 10000);
// n samples (dim each) from the lattice density: node by mass, uniform inside the cell
std::vector<double> sample_from_density(const DensityField& field, std::size_t n, std::uint64_t seed);

void write_path_csv(const std::string& path, const PathSample& p);
void write_jumps_csv(const std::string& path, const JumpSample& s);
std::string ensemble_summary_json(const std::vector<double>& values, int dim);

}  // namespace levy
