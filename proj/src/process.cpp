#include "levy/process.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "levy/error.hpp"
#include "levy/parallel.hpp"
#include "levy/special.hpp"

namespace levy {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double max_expected_jumps = 1e8;

// sample r with density proportional to r^e on [a, b)
double sample_power(double a, double b, double e, double u) {
    const double g = e + 1.0;
    if (std::fabs(g) < 1e-12) return a * std::pow(b / a, u);
    const double A = std::pow(a, g);
    const double B = std::isinf(b) ? 0.0 : std::pow(b, g);
    return std::pow(A + u * (B - A), 1.0 / g);
}

std::vector<double> cholesky(const std::vector<double>& c, int d) {
    std::vector<double> L(d * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = c[i * d + j];
            for (int k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
            if (i == j) L[i * d + i] = s > 0.0 ? std::sqrt(s) : 0.0;
            else L[i * d + j] = L[j * d + j] > 0.0 ? s / L[j * d + j] : 0.0;
        }
    return L;
}

void add_gaussian(const std::vector<double>& L, int d, double var_scale, Stream& rng, double* out) {
    double z[3];
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    const double sc = std::sqrt(var_scale);
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int k = 0; k <= i; ++k) s += L[i * d + k] * z[k];
        out[i] += sc * s;
    }
}

}  // namespace

JumpLaw::JumpLaw(const LevyMeasure& m, double eps) : dim_(m.dim()), eps_(eps), kernels_(m.kernels()) {
    if (!(eps > 0.0)) throw PreconditionError("small-jump truncation eps must be positive");
    const int d = dim_;
    for (const auto& k : kernels_) {
        std::vector<double> c(k.size());
        double s = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i) c[i] = s += k.weights[i];
        kernel_cum_.push_back(std::move(c));
    }
    drift_.assign(d, 0.0);
    cov_.assign(d * d, 0.0);
    const double sigma = m.sigma();
    const double chi_hi = sigma < 1.0 ? 0.0 : (sigma == 1.0 ? 1.0 : inf);
    for (const auto& p : m.pieces()) {
        const auto& k = kernels_[p.kernel];
        const double kmass = kernel_cum_[p.kernel].empty() ? 0.0 : kernel_cum_[p.kernel].back();
        if (!(kmass > 0.0) || p.coef == 0.0) continue;
        // first moment vector and second moment tensor of the angular law
        std::vector<double> z1(d, 0.0), z2(d * d, 0.0);
        for (std::size_t i = 0; i < k.size(); ++i) {
            const double* z = k.node(i);
            for (int a = 0; a < d; ++a) {
                z1[a] += k.weights[i] * z[a];
                for (int b = 0; b < d; ++b) z2[a * d + b] += k.weights[i] * z[a] * z[b];
            }
        }
        const double a = std::max(p.r_lo, eps), b = p.r_hi;
        if (b > a) {
            const double mass = p.coef * kmass * power_integral(a, b, p.beta);
            if (!std::isfinite(mass)) throw NumericalError("jump intensity above eps is infinite");
            classes_.push_back({a, b, -1.0 - p.beta, static_cast<std::size_t>(p.kernel)});
            total_ += mass;
            class_cum_.push_back(total_);
            const double c_hi = std::min(b, chi_hi);
            if (c_hi > a) {
                const double r1 = p.coef * power_integral(a, c_hi, p.beta - 1.0);
                bool zero = true;
                for (double v : z1) zero = zero && std::fabs(v) <= 1e-14 * kmass;
                if (!zero) {
                    if (!std::isfinite(r1)) throw NumericalError("compensating drift diverges: the measure has no first moment at infinity");
                    for (int q = 0; q < d; ++q) drift_[q] += r1 * z1[q];
                }
            }
        }
        const double s_hi = std::min(eps, p.r_hi);
        if (s_hi > p.r_lo) {
            const double r2 = p.coef * power_integral(p.r_lo, s_hi, p.beta - 2.0);
            for (int q = 0; q < d * d; ++q) cov_[q] += r2 * z2[q];
        }
    }
    chol_ = cholesky(cov_, d);
    double tr = 0.0;
    for (int q = 0; q < d; ++q) tr += cov_[q * d + q];
    const double ref = m.radial_moment(0.0, 1.0, 2.0);
    discarded_fraction_ = ref > 0.0 ? tr / ref : 0.0;
}

void JumpLaw::sample(Stream& rng, double* y) const {
    const auto& c = classes_[class_cum_.size() == 1 ? 0 : rng.categorical(class_cum_.data(), class_cum_.size())];
    const double r = sample_power(c.a, c.b, c.e, rng.uniform());
    const auto& cum = kernel_cum_[c.kernel];
    const double* z = kernels_[c.kernel].node(rng.categorical(cum.data(), cum.size()));
    for (int a = 0; a < dim_; ++a) y[a] = r * z[a];
}

std::vector<double> PathSample::jump_part(double t) const {
    std::vector<double> z(dim, 0.0);
    for (int a = 0; a < dim; ++a) z[a] = -t * drift[a];
    for (std::size_t i = 0; i < jumps.times.size() && jumps.times[i] <= t; ++i)
        for (int a = 0; a < dim; ++a) z[a] += jumps.jumps[i * dim + a];
    return z;
}

namespace {

void check_count(const JumpLaw& law, double T) {
    if (law.intensity() * T > max_expected_jumps) {
        std::ostringstream os;
        os << "expected jump count " << law.intensity() * T << " exceeds " << max_expected_jumps
           << "; use a larger eps than " << law.eps();
        throw NumericalError(os.str());
    }
}

}  // namespace

PathSample simulate_levy_path(const LevyMeasure& m, const PathOptions& opt, Stream& rng) {
    if (!(opt.T > 0.0)) throw PreconditionError("horizon T must be positive");
    if (opt.time_nodes == 0) throw PreconditionError("path needs at least one time interval");
    const JumpLaw law(m, opt.eps);
    check_count(law, opt.T);
    const int d = law.dim();
    PathSample p;
    p.dim = d;
    p.eps = opt.eps;
    p.drift = law.drift();
    p.brownian = opt.brownian;
    p.discarded_fraction = law.discarded_fraction();
    if (!opt.brownian && p.discarded_fraction > 0.01) {
        std::ostringstream os;
        os << "jumps below eps carry " << p.discarded_fraction * 100 << "% of the small-jump variance";
        p.warnings.push_back(os.str());
    }
    p.jumps.T = opt.T;
    p.jumps.dim = d;
    p.jumps.intensity = law.intensity();
    p.jumps.compensated = m.sigma() >= 1.0;
    const double lam = law.intensity();
    std::vector<double> y(d);
    if (lam > 0.0) {
        double t = rng.exponential() / lam;
        while (t <= opt.T) {
            law.sample(rng, y.data());
            p.jumps.times.push_back(t);
            p.jumps.jumps.insert(p.jumps.jumps.end(), y.begin(), y.end());
            t += rng.exponential() / lam;
        }
    }
    const std::size_t K = opt.time_nodes;
    p.times.resize(K + 1);
    p.values.assign((K + 1) * d, 0.0);
    Stream bm = rng.split(purpose::brownian);
    std::vector<double> acc(d, 0.0), gauss(d, 0.0);
    std::size_t next = 0;
    const double dt = opt.T / static_cast<double>(K);
    for (std::size_t k = 0; k <= K; ++k) {
        const double t = k == K ? opt.T : dt * static_cast<double>(k);
        p.times[k] = t;
        while (next < p.jumps.times.size() && p.jumps.times[next] <= t) {
            for (int a = 0; a < d; ++a) acc[a] += p.jumps.jumps[next * d + a];
            ++next;
        }
        if (opt.brownian && k > 0) add_gaussian(law.small_cholesky(), d, dt, bm, gauss.data());
        for (int a = 0; a < d; ++a) p.values[k * d + a] = acc[a] - t * p.drift[a] + gauss[a];
    }
    return p;
}

PathSample simulate_levy_path(const LevyMeasure& m, const PathOptions& opt, std::uint64_t seed, std::uint64_t replica) {
    Stream rng(seed, replica, purpose::levy_path);
    return simulate_levy_path(m, opt, rng);
}

void levy_increment(const JumpLaw& law, double T, bool brownian, Stream& rng, double* out) {
    const int d = law.dim();
    for (int a = 0; a < d; ++a) out[a] = -T * law.drift()[a];
    const double lam = law.intensity();
    double y[3];
    if (lam > 0.0) {
        double t = rng.exponential() / lam;
        while (t <= T) {
            law.sample(rng, y);
            for (int a = 0; a < d; ++a) out[a] += y[a];
            t += rng.exponential() / lam;
        }
    }
    if (brownian) {
        Stream bm = rng.split(purpose::brownian);
        add_gaussian(law.small_cholesky(), d, T, bm, out);
    }
}

namespace {

std::vector<double> terminal_values(const LevyMeasure& m, double T, double eps, std::size_t n, std::uint64_t seed,
                                    bool brownian, bool split) {
    if (!(T > 0.0)) throw PreconditionError("horizon T must be positive");
    const JumpLaw law(m, eps);
    check_count(law, T);
    const int d = law.dim();
    std::vector<double> out(n * d, 0.0);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        double tmp[3];
        for (std::size_t i = b; i < e; ++i) {
            Stream rng(seed, i, purpose::levy_path);
            if (!split) {
                levy_increment(law, T, brownian, rng, out.data() + i * d);
                continue;
            }
            for (std::uint32_t half = 0; half < 2; ++half) {
                Stream child = rng.split(half);
                levy_increment(law, 0.5 * T, brownian, child, tmp);
                for (int a = 0; a < d; ++a) out[i * d + a] += tmp[a];
            }
        }
    });
    return out;
}

}  // namespace

std::vector<double> simulate_terminal_values(const LevyMeasure& m, double T, double eps, std::size_t n,
                                             std::uint64_t seed, bool brownian) {
    return terminal_values(m, T, eps, n, seed, brownian, false);
}

std::vector<double> simulate_terminal_values_split(const LevyMeasure& m, double T, double eps, std::size_t n,
                                                   std::uint64_t seed, bool brownian) {
    return terminal_values(m, T, eps, n, seed, brownian, true);
}

double MarkIntensity::total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

JumpSample simulate_poisson_measure(const MarkIntensity& pi, double T, Stream& rng) {
    if (pi.weights.empty()) throw PreconditionError("intensity has no marks");
    for (double w : pi.weights)
        if (!(w >= 0.0)) throw PreconditionError("mark intensities must be nonnegative");
    const double lam = pi.total();
    if (!std::isfinite(lam)) throw PreconditionError("total intensity is infinite; restrict the marks to a set U_n of finite mass");
    if (!(T > 0.0)) throw PreconditionError("horizon T must be positive");
    JumpSample s;
    s.T = T;
    s.intensity = lam;
    s.compensated = true;
    if (lam == 0.0) return s;
    std::vector<double> cum(pi.weights.size());
    double c = 0.0;
    for (std::size_t i = 0; i < cum.size(); ++i) cum[i] = c += pi.weights[i];
    double t = rng.exponential() / lam;
    while (t <= T) {
        s.times.push_back(t);
        s.marks.push_back(rng.categorical(cum.data(), cum.size()));
        t += rng.exponential() / lam;
    }
    return s;
}

JumpSample simulate_poisson_measure(const MarkIntensity& pi, double T, std::uint64_t seed, std::uint64_t replica) {
    Stream rng(seed, replica, purpose::poisson_measure);
    return simulate_poisson_measure(pi, T, rng);
}

double compensated_sum(const JumpSample& s, const MarkIntensity& pi, const std::vector<double>& h) {
    if (h.size() != pi.weights.size()) throw PreconditionError("test function must have one value per mark");
    double sum = 0.0, comp = 0.0;
    for (auto k : s.marks) sum += h.at(k);
    for (std::size_t i = 0; i < h.size(); ++i) comp += h[i] * pi.weights[i];
    return sum - s.T * comp;
}

bool ECFPoint::within(double k) const {
    return std::fabs(empirical.real() - exact.real()) <= k * se && std::fabs(empirical.imag() - exact.imag()) <= k * se;
}

std::vector<ECFPoint> empirical_characteristic(const std::vector<double>& values, int dim, const std::vector<double>& xi,
                                               const std::vector<cplx>& exact) {
    if (xi.size() != exact.size()) throw PreconditionError("one exact value per frequency");
    const std::size_t n = values.size() / dim;
    if (n < 2) throw PreconditionError("need at least two samples");
    std::vector<ECFPoint> out;
    for (std::size_t q = 0; q < xi.size(); ++q) {
        double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = 2.0 * M_PI * xi[q] * values[i * dim];
            const double c = std::cos(a), s = std::sin(a);
            sc += c;
            ss += s;
            sc2 += c * c;
            ss2 += s * s;
        }
        const double nn = static_cast<double>(n);
        const double mc = sc / nn, ms = ss / nn;
        const double vc = std::max(0.0, sc2 / nn - mc * mc) * nn / (nn - 1.0);
        const double vs = std::max(0.0, ss2 / nn - ms * ms) * nn / (nn - 1.0);
        out.push_back({xi[q], cplx(mc, ms), exact[q], std::sqrt(std::max(vc, vs) / nn)});
    }
    return out;
}

DensityCheck empirical_density_check(const std::vector<double>& values, const DensityField& field, std::size_t min_samples) {
    const Lattice& lat = field.lattice;
    const int d = lat.dim();
    DensityCheck rep;
    rep.n = values.size() / d;
    if (rep.n < min_samples) throw PreconditionError("density check needs at least " + std::to_string(min_samples) + " samples");
    const std::size_t M = lat.M();
    const double h = lat.h();
    const double cell = lat.cell_volume();
    rep.band = 1.5 * 1.36 / std::sqrt(static_cast<double>(rep.n));
    for (int a = 0; a < d; ++a) {
        // marginal CDF at the cell edges x_n + h/2
        std::vector<double> marg(M, 0.0);
        std::size_t stride = 1;
        for (int b = a + 1; b < d; ++b) stride *= M;
        for (std::size_t k = 0; k < lat.size(); ++k) marg[(k / stride) % M] += field.values[k] * cell;
        std::vector<double> cdf(M + 1, 0.0);
        for (std::size_t n = 0; n < M; ++n) cdf[n + 1] = cdf[n] + marg[n];
        const double left = lat.axis_coordinate(0) - 0.5 * h;
        auto F = [&](double x) {
            const double u = (x - left) / h;
            if (u <= 0.0) return 0.0;
            if (u >= static_cast<double>(M)) return cdf[M];
            const auto i = static_cast<std::size_t>(u);
            return cdf[i] + (u - static_cast<double>(i)) * (cdf[i + 1] - cdf[i]);
        };
        std::vector<double> x(rep.n);
        for (std::size_t i = 0; i < rep.n; ++i) x[i] = values[i * d + a];
        std::sort(x.begin(), x.end());
        double D = 0.0;
        const double nn = static_cast<double>(rep.n);
        for (std::size_t i = 0; i < rep.n; ++i) {
            const double f = F(x[i]);
            D = std::max({D, (static_cast<double>(i) + 1.0) / nn - f, f - static_cast<double>(i) / nn});
        }
        rep.distance.push_back(D);
        rep.max_distance = std::max(rep.max_distance, D);
    }
    rep.pass = rep.max_distance <= rep.band;
    return rep;
}

std::vector<double> sample_from_density(const DensityField& field, std::size_t n, std::uint64_t seed) {
    const Lattice& lat = field.lattice;
    const int d = lat.dim();
    std::vector<double> cum(lat.size());
    double c = 0.0;
    for (std::size_t k = 0; k < cum.size(); ++k) cum[k] = c += std::max(0.0, field.values[k]);
    if (!(c > 0.0)) throw PreconditionError("density has no positive mass");
    std::vector<double> out(n * d);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        double x[3];
        for (std::size_t i = b; i < e; ++i) {
            Stream rng(seed, i, purpose::inverse_cdf);
            const std::size_t k = rng.categorical(cum.data(), cum.size());
            lat.coordinates(k, x);
            for (int a = 0; a < d; ++a) out[i * d + a] = x[a] + (rng.uniform() - 0.5) * lat.h();
        }
    });
    return out;
}

void write_path_csv(const std::string& path, const PathSample& p) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f.precision(17);
    f << "t";
    for (int a = 0; a < p.dim; ++a) f << ",z" << a;
    f << "\n";
    for (std::size_t k = 0; k < p.times.size(); ++k) {
        f << p.times[k];
        for (int a = 0; a < p.dim; ++a) f << "," << p.values[k * p.dim + a];
        f << "\n";
    }
}

void write_jumps_csv(const std::string& path, const JumpSample& s) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f.precision(17);
    f << "t";
    if (!s.marks.empty()) f << ",mark";
    for (int a = 0; a < s.dim; ++a) f << ",y" << a;
    f << "\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        f << s.times[i];
        if (!s.marks.empty()) f << "," << s.marks[i];
        for (int a = 0; a < s.dim; ++a) f << "," << s.jumps[i * s.dim + a];
        f << "\n";
    }
}

std::string ensemble_summary_json(const std::vector<double>& values, int dim) {
    const std::size_t n = values.size() / dim;
    nlohmann::json j;
    j["samples"] = n;
    j["dim"] = dim;
    std::vector<double> mean(dim, 0.0), sd(dim, 0.0), med(dim, 0.0);
    for (int a = 0; a < dim; ++a) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = values[i * dim + a];
        double s = 0.0, s2 = 0.0;
        for (double v : x) {
            s += v;
            s2 += v * v;
        }
        mean[a] = n ? s / n : 0.0;
        sd[a] = n > 1 ? std::sqrt(std::max(0.0, (s2 - n * mean[a] * mean[a]) / (n - 1.0))) : 0.0;
        if (n) {
            std::nth_element(x.begin(), x.begin() + n / 2, x.end());
            med[a] = x[n / 2];
        }
    }
    j["mean"] = mean;
    j["sd"] = sd;
    j["median"] = med;
    return j.dump();
}

}  // namespace levy
