#pragma once

#include <functional>
#include <string>
#include <vector>

#include "levy/measures.hpp"

namespace levy {

using Profile = std::function<double(double)>;

Profile w_profile(const LevyMeasure& m);
// log-log interpolation of a tabulated w; throws outside the grid
Profile interpolated_profile(const TailProfile& t);

struct EpsWindow {
    double lo, hi;
    int per_decade = 200;
};

struct RatioFunctions {
    std::vector<double> x, r1, r2;
    EpsWindow zero{1e-14, 1e-8}, infinity{1e8, 1e14};
    // largest ratio per decade of eps, ordered toward the limit point, for each x
    std::vector<std::vector<double>> trend1, trend2;
};

RatioFunctions ratio_functions(const Profile& w, const std::vector<double>& x, EpsWindow zero = {1e-14, 1e-8},
                               EpsWindow infinity = {1e8, 1e14});

struct IndexOptions {
    double x_lo = 1e-4, x_hi = 1e4;
    int per_decade = 25;
    double window_decades = 2.0;
    double residual_threshold = 1.0;
    EpsWindow zero{1e-14, 1e-8}, infinity{1e8, 1e14};
};

ORVIndices estimate_indices(const Profile& w, const IndexOptions& opt = {});

struct Clause {
    std::string name;
    double value, bound, margin;
    bool pass;
};
struct AssumptionAReport {
    bool pass = true;
    std::vector<Clause> clauses;
    bool sigma_bracketed = true;  // p1 <= sigma <= q1 (diagnostic only)
};
AssumptionAReport check_assumption_A(const ORVIndices& idx, double sigma, double tol = 0.0);

struct ScalingBounds {
    double c1 = 0.0, c2 = 0.0;
    double c1_inner = 0.0, c2_inner = 0.0;  // same sweep restricted to the central half of the span
    std::size_t pairs = 0;
    bool bounded = true;
};
ScalingBounds scaling_bounds(const ORVIndices& idx, const Profile& w, double alpha1, double alpha2,
                             double x_lo = 1e-8, double x_hi = 1e8, int points = 141);

class GeneralizedInverse {
public:
    GeneralizedInverse(Profile w, double scan_lo = 1e-12, double scan_hi = 1e12);
    double operator()(double t) const;
    const Profile& source() const { return w_; }
    // (r_lo, r_hi) where w is flat on the scan grid
    const std::vector<std::pair<double, double>>& plateaus() const { return plateaus_; }

private:
    Profile w_;
    std::vector<std::pair<double, double>> plateaus_;
};

GeneralizedInverse generalized_inverse(const Profile& w);

enum class KaramataLemma { ZeroA, ZeroB, ZeroC, ZeroD, InfA, InfB, InfC, InfD, InverseLower, InverseUpper };
const char* karamata_name(KaramataLemma k);

struct KaramataCase {
    KaramataLemma lemma;
    double beta, tau;
};

struct KaramataResult {
    KaramataCase c;
    double sup_ratio = 0.0;
    double refined_sup_ratio = 0.0;
    double drift = 0.0;
    std::string limit_claim;
    bool limit_ok = false;
    bool pass = false;
};

// Throws PreconditionError naming the violated constraint.
std::vector<KaramataResult> verify_karamata_integrals(const Profile& w, const ORVIndices& idx,
                                                      const std::vector<KaramataCase>& cases,
                                                      double drift_threshold = 0.02);

}  // namespace levy
