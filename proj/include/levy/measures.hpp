#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace levy {

// Finite quadrature on the unit sphere S^{d-1}: node k is nodes[k*dim .. k*dim+dim).
struct AngularKernel {
    int dim = 1;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    const double* node(std::size_t k) const { return nodes.data() + k * dim; }
    double mass() const;
    bool symmetric(double tol = 1e-12) const;
    // inf over sampled unit directions of sum_k s_k |xi.z_k|^2 / mass
    double min_directional_second_moment(const std::vector<double>& directions) const;
};

AngularKernel sphere_surface(int dim, int resolution = 0);
AngularKernel mirrored(const AngularKernel& k);
// Quasi-uniform unit directions (flattened, dim per direction).
std::vector<double> unit_directions(int dim, int count);

// nu restricted to r in [r_lo, r_hi) is coef * r^{-1-beta} dr x kernel(dz).
struct RadialPiece {
    double r_lo = 0.0;
    double r_hi = 0.0;
    double coef = 0.0;
    double beta = 0.0;
    int kernel = 0;
};

struct TailProfile {
    std::vector<double> grid;
    std::vector<double> delta;
    std::vector<double> w;
};

struct ORVIndices {
    double p1 = 0.0, q1 = 0.0, p2 = 0.0, q2 = 0.0;
    // regression half-widths per index
    double hw_p1 = 0.0, hw_q1 = 0.0, hw_p2 = 0.0, hw_q2 = 0.0;
    double lower() const { return p1 < p2 ? p1 : p2; }
    double upper() const { return q1 > q2 ? q1 : q2; }
};

enum class MeasureKind { Stable, RadialAngular, Tabulated };

const char* kind_name(MeasureKind k);

class LevyMeasure {
public:
    // |y|^{-d-sigma} scale dy
    static LevyMeasure stable(int dim, double sigma, double scale = 1.0, int sphere_resolution = 0);

    struct PowerSegment {
        double r_lo, r_hi;
        double coef;
        double exponent;  // j(r) = coef r^exponent on [r_lo, r_hi)
    };
    struct AngularBand {
        double r_lo, r_hi;
        std::vector<double> values;  // a(r, z_k) on the band, one per sphere node
    };
    static LevyMeasure radial_angular(int dim, double sigma, std::vector<PowerSegment> j,
                                      const AngularKernel& sphere, std::vector<AngularBand> bands);
    // j tabulated on a log grid, log-log interpolated, extended by the end slopes
    static std::vector<PowerSegment> power_segments_from_table(const std::vector<double>& r,
                                                               const std::vector<double>& j);

    // Table of delta(r_m); row_kernel[m] selects the angular law Pi on [r_m, r_{m+1})
    // (the first/last rows also cover the extensions). Kernels are normalized to mass 1.
    static LevyMeasure tabulated(int dim, double sigma, std::vector<double> r, std::vector<double> delta,
                                 std::vector<AngularKernel> kernels = {}, std::vector<int> row_kernel = {});

    int dim() const { return dim_; }
    double sigma() const { return sigma_; }
    MeasureKind kind() const { return kind_; }
    double stable_scale() const { return scale_; }
    const std::vector<RadialPiece>& pieces() const { return pieces_; }
    const std::vector<AngularKernel>& kernels() const { return kernels_; }
    const std::vector<double>& table_r() const { return table_r_; }
    const std::vector<double>& table_delta() const { return table_delta_; }
    bool symmetric() const;
    std::uint64_t hash() const;
    std::string describe() const;

    // delta(r) = nu(|y| > r)
    double tail(double r) const;
    double w(double r) const { return 1.0 / tail(r); }
    // nu(a < |y| <= b)
    double annulus_mass(double a, double b) const;
    // \int_{a<|y|<=b} |y|^alpha nu(dy)
    double radial_moment(double a, double b, double alpha) const;
    // \int_{|y|<=b} |xi.y|^2 nu(dy) for a unit direction xi
    double directional_second_moment(const double* xi, double b) const;
    // exponent of the tail at the origin and at infinity
    double inner_index() const;
    double outer_index() const;

    // w(R) nu(R dy); weight overrides w(R) when positive
    LevyMeasure scaled(double R, double weight = 0.0) const;
    LevyMeasure symmetrized() const;

    void validate() const;

private:
    void finalize();

    MeasureKind kind_ = MeasureKind::Stable;
    int dim_ = 1;
    double sigma_ = 1.0;
    double scale_ = 1.0;
    std::vector<RadialPiece> pieces_;
    std::vector<AngularKernel> kernels_;
    std::vector<double> kernel_mass_;
    std::vector<double> suffix_mass_;
    std::vector<double> table_r_, table_delta_;
};

TailProfile tail_function(const LevyMeasure& m, const std::vector<double>& grid);

// (\int_{|y|<=1} |y|^{a1} dnu, \int_{|y|>1} |y|^{a2} dnu) on the measure as given
// (pass a rescaled measure for the nu~_R integrals). Rejects a1 <= upper, a2 >= lower, a2 <= 0,
// where upper/lower default to the declared order.
struct MomentPair {
    double inner, outer;
};
MomentPair moment_integrals(const LevyMeasure& m, double alpha1, double alpha2, double upper = -1.0,
                            double lower = -1.0);

// Measure described by a JSON object; relative paths resolve against base_dir.
LevyMeasure measure_from_json(const std::string& json_text, const std::string& base_dir = ".");
std::vector<std::pair<double, double>> read_csv_pairs(const std::string& path);

}  // namespace levy
