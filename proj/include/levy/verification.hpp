#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levy/measures.hpp"
#include "levy/orv.hpp"
#include "levy/solver.hpp"
#include "levy/spaces.hpp"

namespace levy {

struct EstimateSample {
    std::vector<double> params;
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;
};

struct EstimateReport {
    std::string id;
    std::vector<std::string> param_names;
    std::vector<EstimateSample> samples;
    double C = 0.0;               // sup lhs / rhs
    double median = 0.0;          // median ratio
    std::vector<double> level_C;  // C per refinement level
    double drift = 0.0;           // max relative change of C across levels
    double drift_threshold = 0.0;
    std::vector<std::pair<std::string, double>> diagnostics;
    std::vector<std::string> warnings;
    bool pass = false;

    double diagnostic(const std::string& key) const;  // NaN when absent
};

std::string report_json(const EstimateReport& r);
// one row per sample: params..., lhs, rhs, ratio
void write_report_csv(const std::string& path, const EstimateReport& r);

// ---- Hormander conditions

struct HormanderSample {
    double s = 0.0, y = 0.0, eta = 1.0;  // y is a shift along the first axis
};

struct HormanderOptions {
    double lambda = 0.0;
    std::vector<double> epsilons{1e-3, 1e-2, 1e-1};
    int points_per_scale = 8;      // lattice nodes per a(t)
    double period_factor = 128.0;  // period / largest relevant length
    std::size_t max_nodes = 1 << 13;
    double tail_tol = 1e-6;  // extrapolated remainder of the time integral relative to the total
    double spread_limit = 10.0;
    double eps_drift_limit = 0.1;
    double refine_drift_limit = 0.1;
};

// n samples with eta log-spaced over [eta_lo, eta_hi] and (s, y) cycling through admissible corners and interiors
std::vector<HormanderSample> hormander_samples(const LevyMeasure& m, std::size_t n, double eta_lo, double eta_hi);
// smallest C0 in {4, 5, ...} with w(C0 eta) > 3 w(eta) at every sampled eta
double hormander_C0(const Profile& w, const std::vector<double>& etas);

// \int 1_{Q^c} |K(t - s, x - y) - K(t, x)| dx dt with K = e^{-lambda t} L p^{nu*}(t, x) 1_{t >= eps}
double hormander_integral(const LevyMeasure& m, const HormanderSample& smp, double eps, double C0,
                          const HormanderOptions& opt, int level = 0);
// \int [\int 1_{Q^c} |...| dx]^2 dt with K built from L^{nu;1/2}
double stochastic_hormander_integral(const LevyMeasure& m, const HormanderSample& smp, double eps, double C0,
                                     const HormanderOptions& opt, int level = 0);

// rejects samples with |s| > w(eta) or |y| > eta
EstimateReport hormander_check(const LevyMeasure& m, const std::vector<HormanderSample>& samples,
                               const HormanderOptions& opt = {});
EstimateReport stochastic_hormander_check(const LevyMeasure& m, const std::vector<HormanderSample>& samples,
                                          const HormanderOptions& opt = {});

// \int_{2b}^inf (\int |L^{nu;1/2} p(t - s, x) - L^{nu;1/2} p(t, x)| dx)^2 dt for |s| <= b
double fractional_time_difference(const LevyMeasure& m, double s, double b, const HormanderOptions& opt = {}, int level = 0);
EstimateReport fractional_time_difference_check(const LevyMeasure& m, const std::vector<std::pair<double, double>>& sb,
                                                const HormanderOptions& opt = {});

// ---- initial-value and a priori estimates

struct EstimateGrid {
    FrequencyGrid grid;
    int N = 2;
    double T = 1.0;
    std::size_t time_steps = 128;
};

// (\int_0^T ||L T_t^lambda g||_p^p dt)^{1/p} by graded Gauss-Legendre panels in t
double initial_lhs(const SymbolField& psi, const std::vector<double>& g, double lambda, double T, double p);

// C = sup ||L T g||_{L_p(E)} / |g|_{B^{1-1/p}_{pp}} over the family; besov_s overrides 1 - 1/p (negative controls)
EstimateReport initial_estimate_check(const LevyMeasure& m, const std::vector<EstimateGrid>& levels,
                                      const std::vector<std::vector<double>>& family_per_level, double lambda, double p,
                                      double besov_s = NAN, double drift_limit = 0.25);

// sum of modulated Gaussians with carrier frequencies in [xi_min, xi_max]; the same (seed, index) gives the same
// function on every lattice with the same period
std::vector<double> random_band_limited(const Lattice& lat, double xi_max, std::uint64_t seed, std::uint64_t index,
                                        int terms = 3, double xi_min = 0.0);
// n band-limited members with carriers in [b_i / 2, b_i], b_i = sweep_bound(xi_max, i, n): four octaves up to
// xi_max, low frequencies first
std::vector<std::vector<double>> mixed_family(const Lattice& lat, double xi_max, std::size_t n, std::uint64_t seed);
double sweep_bound(double xi_max, std::size_t i, std::size_t n);

struct APrioriInputs {
    bool use_g = true, use_f = true, use_phi = true;
    double xi_max = 4.0;         // carrier frequency bound of the inputs
    std::size_t members = 4;     // ensemble members (independent input draws)
    std::size_t marks = 4;       // |U_n| <= 8
    std::size_t paths = 16;      // noise realizations per member
    std::uint64_t seed = 1;
    bool frequency_sweep = false;  // member i draws carriers in [b / 2, b], b = sweep_bound(xi_max, i, members)
    double g_besov_s = NAN;        // overrides 1 - 1/p in the g term (negative controls)
};

struct APrioriRow {
    std::size_t member;
    double Lu, u;                            // (E \int ||L u||_p^p)^{1/p}, (E \int ||u||_p^p)^{1/p}
    double f, g_besov, g_lp, phi_besov, phi_lp, phi_h2, phi_l2;  // input norms
    double rhs_L, rhs_u, ratio_L, ratio_u;
};

struct APrioriReport {
    EstimateReport L;  // C for |L u|
    EstimateReport u;  // C for the rho-weighted bound on |u|
    std::vector<APrioriRow> rows;
};

APrioriReport apriori_estimate_check(const LevyMeasure& m, const EstimateGrid& level, const APrioriInputs& in, double p,
                                     double lambda);
// one run per level; level_C and drift across levels, pass needs drift and enrichment below drift_limit
APrioriReport apriori_refinement_check(const LevyMeasure& m, const std::vector<EstimateGrid>& levels,
                                       const APrioriInputs& in, double p, double lambda, double drift_limit = 0.25);

// ---- fractional representation

struct FractionalOptions {
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    double split = 1.0;           // a in the split of the time integral
    double t_max = 1e3;
    std::size_t nodes_per_decade = 24;
    double jump_factor = 0.1;     // increments keep jumps above jump_factor * a(dt)
    std::size_t points = 48;      // evaluation points x
    std::optional<LevyMeasure> path_measure;  // negative controls: the Monte Carlo route uses this measure instead
};

struct FractionalRoute {
    std::vector<double> x, spectral, mc_raw, se_raw;  // mc_raw without c_delta
};
FractionalRoute fractional_routes(const LevyMeasure& m, double delta, const Lattice& lat, const std::vector<double>& f,
                                  const FractionalOptions& opt);

// delta / Gamma(1 - delta)
double fractional_constant(double delta);

// c_delta calibrated on family[0]; samples are the relative L2 discrepancies and their standard errors
EstimateReport fractional_representation_check(const LevyMeasure& m, double delta, const Lattice& lat,
                                               const std::vector<std::vector<double>>& family,
                                               const FractionalOptions& opt = {});

}  // namespace levy
