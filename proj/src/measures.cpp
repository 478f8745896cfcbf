#include "levy/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "levy/error.hpp"
#include "levy/hash.hpp"
#include "levy/special.hpp"

namespace levy {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

bool opposite_node(const double* a, const double* b, int dim) {
    for (int i = 0; i < dim; ++i)
        if (std::fabs(a[i] + b[i]) > 1e-12) return false;
    return true;
}

double dot(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

AngularKernel normalized(AngularKernel k) {
    const double m = k.mass();
    if (!(m > 0.0)) throw ConfigError("angular kernel has no mass");
    for (double& s : k.weights) s /= m;
    return k;
}

// consecutive pieces describing one power law (same beta, same density constant) merge
std::vector<RadialPiece> merge_collinear(std::vector<RadialPiece> in) {
    std::vector<RadialPiece> out;
    for (const auto& p : in) {
        if (!out.empty()) {
            auto& q = out.back();
            if (q.kernel == p.kernel && q.r_hi == p.r_lo && std::fabs(q.beta - p.beta) < 1e-10 &&
                std::fabs(q.coef - p.coef) <= 1e-10 * std::max(std::fabs(q.coef), std::fabs(p.coef))) {
                q.r_hi = p.r_hi;
                continue;
            }
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace

double AngularKernel::mass() const {
    double s = 0.0;
    for (double v : weights) s += v;
    return s;
}

bool AngularKernel::symmetric(double tol) const {
    double smax = 0.0;
    for (double v : weights) smax = std::max(smax, std::fabs(v));
    for (std::size_t i = 0; i < size(); ++i) {
        if (weights[i] == 0.0) continue;
        bool found = false;
        for (std::size_t j = 0; j < size() && !found; ++j) {
            if (opposite_node(node(i), node(j), dim) && std::fabs(weights[i] - weights[j]) <= tol * smax) found = true;
        }
        if (!found) return false;
    }
    return true;
}

double AngularKernel::min_directional_second_moment(const std::vector<double>& directions) const {
    const double m = mass();
    double best = inf;
    for (std::size_t d = 0; d + dim <= directions.size(); d += dim) {
        double s = 0.0;
        for (std::size_t k = 0; k < size(); ++k) {
            const double u = dot(directions.data() + d, node(k), dim);
            s += weights[k] * u * u;
        }
        best = std::min(best, s / m);
    }
    return best;
}

AngularKernel sphere_surface(int dim, int resolution) {
    AngularKernel k;
    k.dim = dim;
    if (dim == 1) {
        k.nodes = {1.0, -1.0};
        k.weights = {1.0, 1.0};
    } else if (dim == 2) {
        const int n = resolution > 0 ? resolution : 64;
        for (int i = 0; i < n; ++i) {
            const double th = 2.0 * M_PI * i / n;
            k.nodes.push_back(std::cos(th));
            k.nodes.push_back(std::sin(th));
            k.weights.push_back(2.0 * M_PI / n);
        }
    } else if (dim == 3) {
        const int n = resolution > 0 ? resolution : 12;
        const GaussRule& g = gauss_legendre(n);
        for (int i = 0; i < n; ++i) {
            const double ct = g.x[i], st = std::sqrt(1.0 - ct * ct);
            for (int j = 0; j < 2 * n; ++j) {
                const double ph = M_PI * j / n;
                k.nodes.insert(k.nodes.end(), {st * std::cos(ph), st * std::sin(ph), ct});
                k.weights.push_back(g.w[i] * M_PI / n);
            }
        }
    } else {
        throw ConfigError("dimension must be 1, 2 or 3");
    }
    return k;
}

AngularKernel mirrored(const AngularKernel& k) {
    AngularKernel out;
    out.dim = k.dim;
    const std::size_t n = k.size();
    std::vector<int> partner(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (opposite_node(k.node(i), k.node(j), k.dim)) {
                partner[i] = static_cast<int>(j);
                break;
            }
    for (std::size_t i = 0; i < n; ++i) {
        out.nodes.insert(out.nodes.end(), k.node(i), k.node(i) + k.dim);
        const double other = partner[i] >= 0 ? k.weights[partner[i]] : 0.0;
        out.weights.push_back(0.5 * (k.weights[i] + other));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (partner[i] >= 0) continue;
        for (int c = 0; c < k.dim; ++c) out.nodes.push_back(-k.node(i)[c]);
        out.weights.push_back(0.5 * k.weights[i]);
    }
    return out;
}

std::vector<double> unit_directions(int dim, int count) {
    std::vector<double> out;
    if (dim == 1) return {1.0};
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = M_PI * i / count;
            out.push_back(std::cos(th));
            out.push_back(std::sin(th));
        }
        return out;
    }
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - (i + 0.5) / count;
        const double r = std::sqrt(1.0 - z * z);
        out.insert(out.end(), {r * std::cos(golden * i), r * std::sin(golden * i), z});
    }
    return out;
}

const char* kind_name(MeasureKind k) {
    switch (k) {
        case MeasureKind::Stable: return "stable";
        case MeasureKind::RadialAngular: return "radial_angular";
        case MeasureKind::Tabulated: return "tabulated";
    }
    return "?";
}

LevyMeasure LevyMeasure::stable(int dim, double sigma, double scale, int sphere_resolution) {
    if (!(sigma > 0.0 && sigma < 2.0)) throw ConfigError("sigma must lie in (0, 2)");
    if (!(scale > 0.0)) throw ConfigError("stable scale must be positive");
    LevyMeasure m;
    m.kind_ = MeasureKind::Stable;
    m.dim_ = dim;
    m.sigma_ = sigma;
    m.scale_ = scale;
    m.kernels_.push_back(sphere_surface(dim, sphere_resolution));
    m.pieces_.push_back({0.0, inf, scale, sigma, 0});
    m.finalize();
    return m;
}

LevyMeasure LevyMeasure::radial_angular(int dim, double sigma, std::vector<PowerSegment> j,
                                        const AngularKernel& sphere, std::vector<AngularBand> bands) {
    if (j.empty()) throw ConfigError("radial profile j is empty");
    if (sphere.dim != dim || sphere.size() == 0) throw ConfigError("sphere quadrature does not match dim");
    if (bands.empty()) bands.push_back({0.0, inf, std::vector<double>(sphere.size(), 1.0)});
    std::sort(bands.begin(), bands.end(), [](const auto& a, const auto& b) { return a.r_lo < b.r_lo; });
    std::sort(j.begin(), j.end(), [](const auto& a, const auto& b) { return a.r_lo < b.r_lo; });
    LevyMeasure m;
    m.kind_ = MeasureKind::RadialAngular;
    m.dim_ = dim;
    m.sigma_ = sigma;
    for (const auto& b : bands) {
        if (b.values.size() != sphere.size()) throw ConfigError("angular band values do not match the sphere nodes");
        AngularKernel k = sphere;
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (b.values[i] < 0.0 || b.values[i] > 1.0) throw ConfigError("angular function must take values in [0, 1]");
            k.weights[i] *= b.values[i];
        }
        m.kernels_.push_back(std::move(k));
    }
    for (std::size_t i = 1; i < bands.size(); ++i)
        if (bands[i].r_lo < bands[i - 1].r_hi) throw ConfigError("angular bands overlap");
    for (std::size_t i = 1; i < j.size(); ++i)
        if (j[i].r_lo < j[i - 1].r_hi) throw ConfigError("radial segments overlap");
    for (const auto& s : j) {
        if (!(s.coef >= 0.0) || !(s.r_hi > s.r_lo) || s.r_lo < 0.0) throw ConfigError("invalid radial segment");
        for (std::size_t b = 0; b < bands.size(); ++b) {
            const double lo = std::max(s.r_lo, bands[b].r_lo), hi = std::min(s.r_hi, bands[b].r_hi);
            if (!(hi > lo) || s.coef == 0.0 || m.kernels_[b].mass() == 0.0) continue;
            m.pieces_.push_back({lo, hi, s.coef, -(s.exponent + dim), static_cast<int>(b)});
        }
    }
    m.finalize();
    return m;
}

std::vector<LevyMeasure::PowerSegment> LevyMeasure::power_segments_from_table(const std::vector<double>& r,
                                                                              const std::vector<double>& j) {
    if (r.size() < 2 || r.size() != j.size()) throw ConfigError("radial table needs at least two (r, j) rows");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0) || !(j[i] > 0.0)) throw ConfigError("radial table entries must be positive");
        if (i > 0 && !(r[i] > r[i - 1])) throw ConfigError("radial table radii must increase");
    }
    const std::size_t n = r.size();
    std::vector<PowerSegment> out;
    auto slope = [&](std::size_t m) { return std::log(j[m + 1] / j[m]) / std::log(r[m + 1] / r[m]); };
    const double e0 = slope(0), eL = slope(n - 2);
    out.push_back({0.0, r[0], j[0] * std::pow(r[0], -e0), e0});
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double e = slope(m);
        out.push_back({r[m], r[m + 1], j[m] * std::pow(r[m], -e), e});
    }
    out.push_back({r[n - 1], inf, j[n - 1] * std::pow(r[n - 1], -eL), eL});
    return out;
}

LevyMeasure LevyMeasure::tabulated(int dim, double sigma, std::vector<double> r, std::vector<double> delta,
                                   std::vector<AngularKernel> kernels, std::vector<int> row_kernel) {
    const std::size_t n = r.size();
    if (n < 2 || delta.size() != n) throw ConfigError("tail table needs at least two (r, delta) rows");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(r[i] > 0.0)) throw ConfigError("tail table radius must be positive at row " + std::to_string(i));
        if (!(delta[i] > 0.0)) throw ConfigError("tail value must be positive at row " + std::to_string(i));
        if (i > 0 && !(r[i] > r[i - 1])) throw ConfigError("tail table radii must increase at row " + std::to_string(i));
        if (i > 0 && delta[i] > delta[i - 1]) throw ConfigError("tail values must be nonincreasing at row " + std::to_string(i));
    }
    if (delta.front() < 1e3 * delta.back())
        throw ConfigError("tail table spans less than three decades of delta (" + format_double(delta.front()) + " vs " +
                          format_double(delta.back()) + ")");
    if (kernels.empty()) kernels.push_back(sphere_surface(dim));
    for (auto& k : kernels) {
        if (k.dim != dim) throw ConfigError("angular kernel dimension mismatch");
        k = normalized(std::move(k));
    }
    if (row_kernel.empty()) row_kernel.assign(n, 0);
    if (row_kernel.size() != n) throw ConfigError("row_kernel must have one entry per table row");
    for (int idx : row_kernel)
        if (idx < 0 || idx >= static_cast<int>(kernels.size())) throw ConfigError("row_kernel index out of range");

    LevyMeasure m;
    m.kind_ = MeasureKind::Tabulated;
    m.dim_ = dim;
    m.sigma_ = sigma;
    m.kernels_ = std::move(kernels);
    auto beta = [&](std::size_t i) { return -std::log(delta[i + 1] / delta[i]) / std::log(r[i + 1] / r[i]); };
    const double b0 = beta(0), bL = beta(n - 2);
    if (!(b0 > 0.0)) throw ConfigError("tail table must decrease at its small-radius end");
    if (!(bL > 0.0)) throw ConfigError("tail table must decrease at its large-radius end");
    m.pieces_.push_back({0.0, r[0], b0 * delta[0] * std::pow(r[0], b0), b0, row_kernel[0]});
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double b = beta(i);
        if (b == 0.0) continue;
        m.pieces_.push_back({r[i], r[i + 1], b * delta[i] * std::pow(r[i], b), b, row_kernel[i]});
    }
    m.pieces_.push_back({r[n - 1], inf, bL * delta[n - 1] * std::pow(r[n - 1], bL), bL, row_kernel[n - 1]});
    m.table_r_ = std::move(r);
    m.table_delta_ = std::move(delta);
    m.pieces_ = merge_collinear(std::move(m.pieces_));
    m.finalize();
    return m;
}

void LevyMeasure::finalize() {
    std::vector<RadialPiece> split;
    for (const auto& p : pieces_) {
        if (p.r_lo < 1.0 && p.r_hi > 1.0) {
            split.push_back({p.r_lo, 1.0, p.coef, p.beta, p.kernel});
            split.push_back({1.0, p.r_hi, p.coef, p.beta, p.kernel});
        } else {
            split.push_back(p);
        }
    }
    std::sort(split.begin(), split.end(), [](const auto& a, const auto& b) { return a.r_lo < b.r_lo; });
    pieces_ = std::move(split);
    kernel_mass_.clear();
    for (const auto& k : kernels_) kernel_mass_.push_back(k.mass());
    suffix_mass_.assign(pieces_.size() + 1, 0.0);
    for (std::size_t i = pieces_.size(); i-- > 0;) {
        const auto& p = pieces_[i];
        suffix_mass_[i] = suffix_mass_[i + 1] + p.coef * kernel_mass_[p.kernel] * power_integral(p.r_lo, p.r_hi, p.beta);
    }
}

bool LevyMeasure::symmetric() const {
    for (const auto& p : pieces_)
        if (!kernels_[p.kernel].symmetric()) return false;
    return true;
}

std::uint64_t LevyMeasure::hash() const {
    Fnv1a h;
    h.text(kind_name(kind_));
    h.integer(static_cast<std::uint64_t>(dim_));
    h.real(sigma_);
    h.real(scale_);
    for (const auto& p : pieces_) {
        h.real(p.r_lo);
        h.real(p.r_hi);
        h.real(p.coef);
        h.real(p.beta);
        h.integer(static_cast<std::uint64_t>(p.kernel));
    }
    for (const auto& k : kernels_) {
        for (double v : k.nodes) h.real(v);
        for (double v : k.weights) h.real(v);
    }
    return h.value();
}

std::string LevyMeasure::describe() const {
    std::ostringstream s;
    s << kind_name(kind_) << " d=" << dim_ << " sigma=" << sigma_ << " pieces=" << pieces_.size();
    return s.str();
}

double LevyMeasure::tail(double r) const {
    if (!(r > 0.0)) return inf;
    if (kind_ == MeasureKind::Stable) return scale_ * kernel_mass_[0] * std::pow(r, -sigma_) / sigma_;
    if (kind_ == MeasureKind::Tabulated && r >= table_r_.front() && r <= table_r_.back()) {
        auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
        const std::size_t m = static_cast<std::size_t>(it - table_r_.begin()) - 1;
        if (r == table_r_[m] || m + 1 == table_r_.size()) return table_delta_[m];
        const double b = -std::log(table_delta_[m + 1] / table_delta_[m]) / std::log(table_r_[m + 1] / table_r_[m]);
        return table_delta_[m] * std::exp(-b * std::log(r / table_r_[m]));
    }
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), r,
                               [](double v, const RadialPiece& p) { return v < p.r_lo; });
    if (it == pieces_.begin()) return suffix_mass_[0];
    const std::size_t i = static_cast<std::size_t>(it - pieces_.begin()) - 1;
    const auto& p = pieces_[i];
    if (r >= p.r_hi) return suffix_mass_[i + 1];
    return p.coef * kernel_mass_[p.kernel] * power_integral(r, p.r_hi, p.beta) + suffix_mass_[i + 1];
}

double LevyMeasure::radial_moment(double a, double b, double alpha) const {
    double s = 0.0;
    for (const auto& p : pieces_) {
        const double lo = std::max(a, p.r_lo), hi = std::min(b, p.r_hi);
        if (!(hi > lo)) continue;
        s += p.coef * kernel_mass_[p.kernel] * power_integral(lo, hi, p.beta - alpha);
    }
    return s;
}

double LevyMeasure::annulus_mass(double a, double b) const { return radial_moment(a, b, 0.0); }

double LevyMeasure::directional_second_moment(const double* xi, double b) const {
    double s = 0.0;
    for (const auto& p : pieces_) {
        const double hi = std::min(b, p.r_hi);
        if (!(hi > p.r_lo)) continue;
        const auto& k = kernels_[p.kernel];
        double ang = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            const double u = dot(xi, k.node(i), dim_);
            ang += k.weights[i] * u * u;
        }
        s += p.coef * ang * power_integral(p.r_lo, hi, p.beta - 2.0);
    }
    return s;
}

double LevyMeasure::inner_index() const {
    if (pieces_.empty() || pieces_.front().r_lo > 0.0) return 0.0;
    return pieces_.front().beta;
}

double LevyMeasure::outer_index() const {
    if (pieces_.empty() || std::isfinite(pieces_.back().r_hi)) return inf;
    return pieces_.back().beta;
}

LevyMeasure LevyMeasure::scaled(double R, double weight) const {
    if (!(R > 0.0) || !std::isfinite(R)) throw PreconditionError("rescaling radius must be positive and finite");
    if (kind_ == MeasureKind::Tabulated && (R < table_r_.front() || R > table_r_.back()))
        throw PreconditionError("rescaling radius " + format_double(R) + " lies outside the tabulated range [" +
                                format_double(table_r_.front()) + ", " + format_double(table_r_.back()) + "]");
    if (kind_ == MeasureKind::Stable) {
        const double s = weight > 0.0 ? scale_ * weight * std::pow(R, -sigma_) : sigma_ / kernel_mass_[0];
        LevyMeasure m = *this;
        m.scale_ = s;
        m.pieces_ = {{0.0, inf, s, sigma_, 0}};
        m.finalize();
        return m;
    }
    const double W = weight > 0.0 ? weight : w(R);
    if (!std::isfinite(W)) throw NumericalError("w is infinite at the rescaling radius " + format_double(R));
    if (kind_ == MeasureKind::Tabulated) {
        std::vector<double> r(table_r_.size()), d(table_delta_.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = table_r_[i] / R;
            d[i] = table_delta_[i] * W;
        }
        LevyMeasure m = *this;
        m.table_r_ = std::move(r);
        m.table_delta_ = std::move(d);
        m.pieces_.clear();
        for (const auto& p : pieces_)
            m.pieces_.push_back({p.r_lo / R, p.r_hi / R, p.coef * W * std::pow(R, -p.beta), p.beta, p.kernel});
        m.pieces_ = merge_collinear(std::move(m.pieces_));
        m.finalize();
        return m;
    }
    LevyMeasure m = *this;
    m.pieces_.clear();
    for (const auto& p : pieces_)
        m.pieces_.push_back({p.r_lo / R, p.r_hi / R, p.coef * W * std::pow(R, -p.beta), p.beta, p.kernel});
    m.pieces_ = merge_collinear(std::move(m.pieces_));
    m.finalize();
    return m;
}

LevyMeasure LevyMeasure::symmetrized() const {
    if (kind_ == MeasureKind::Stable) return *this;
    LevyMeasure m = *this;
    for (auto& k : m.kernels_) k = mirrored(k);
    m.finalize();
    return m;
}

void LevyMeasure::validate() const {
    if (!(sigma_ > 0.0 && sigma_ < 2.0)) throw ConfigError("sigma must lie in (0, 2), got " + format_double(sigma_));
    if (pieces_.empty()) throw ConfigError("measure has no mass");
    const auto& first = pieces_.front();
    if (first.r_lo > 0.0 || !(first.beta > 0.0))
        throw ConfigError("tail must blow up at the origin (delta(r) -> infinity as r -> 0)");
    if (!(first.beta < 2.0))
        throw ConfigError("measure does not integrate |y|^2 near the origin (tail index " + format_double(first.beta) + ")");
    if (!std::isfinite(pieces_.back().r_hi) && !(pieces_.back().beta > 0.0))
        throw ConfigError("non-integrable tail: delta is infinite at every radius");
    if (pieces_.size() > 1 && !std::isfinite(suffix_mass_[1]))
        throw ConfigError("non-integrable tail beyond radius " + format_double(pieces_[1].r_lo));
    if (std::fabs(first.beta - sigma_) > 0.1)
        throw ConfigError("declared sigma " + format_double(sigma_) + " differs from the tail index at zero " +
                          format_double(first.beta));
    if (sigma_ == 1.0 && !symmetric())
        throw ConfigError("sigma = 1 requires a measure symmetric in every annulus");
    if (sigma_ > 1.0 && !std::isfinite(radial_moment(1.0, inf, 1.0)))
        throw ConfigError("sigma in (1, 2) requires a finite first moment outside the unit ball");
}

TailProfile tail_function(const LevyMeasure& m, const std::vector<double>& grid) {
    TailProfile t;
    t.grid = grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw PreconditionError("tail grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw PreconditionError("tail grid must be strictly increasing");
        const double d = m.tail(grid[i]);
        if (!std::isfinite(d)) throw NumericalError("non-integrable tail: delta(" + format_double(grid[i]) + ") is infinite");
        if (!(d > 0.0)) throw NumericalError("tail vanishes at radius " + format_double(grid[i]));
        t.delta.push_back(i > 0 ? std::min(d, t.delta.back()) : d);
        t.w.push_back(1.0 / t.delta.back());
    }
    return t;
}

MomentPair moment_integrals(const LevyMeasure& m, double alpha1, double alpha2, double upper, double lower) {
    if (upper < 0.0) upper = m.sigma();
    if (lower < 0.0) lower = m.sigma();
    if (!(alpha1 > upper)) throw PreconditionError("alpha1 must exceed the upper index " + format_double(upper));
    if (!(alpha2 < lower)) throw PreconditionError("alpha2 must be below the lower index " + format_double(lower));
    if (!(alpha2 > 0.0)) throw PreconditionError("alpha2 must be positive");
    MomentPair out{m.radial_moment(0.0, 1.0, alpha1), m.radial_moment(1.0, inf, alpha2)};
    if (!std::isfinite(out.inner)) throw NumericalError("inner moment diverges for alpha1 = " + format_double(alpha1));
    if (!std::isfinite(out.outer)) throw NumericalError("outer moment diverges for alpha2 = " + format_double(alpha2));
    return out;
}

}  // namespace levy
