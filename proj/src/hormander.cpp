#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "levy/densities.hpp"
#include "levy/error.hpp"
#include "levy/parallel.hpp"
#include "levy/special.hpp"
#include "levy/verification.hpp"

namespace levy {

namespace {

double pow2_floor(double v) { return std::exp2(std::floor(std::log2(v))); }
double pow2_ceil(double v) { return std::exp2(std::ceil(std::log2(v))); }

// Kernels e^{-lambda t} (op p^{nu*})(t, x - y) on lattices adapted to the scales in play.
class KernelEvaluator {
public:
    KernelEvaluator(const LevyMeasure& m, const HormanderOptions& opt, int level, bool half, bool reflect)
        : m_(m), w_(w_profile(m)), a_(w_), opt_(opt), half_(half), reflect_(reflect) {
        pps_ = opt.points_per_scale << level;
        pf_ = opt.period_factor * std::exp2(level);
        cap_ = opt.max_nodes << (2 * level);
        Mcap_ = static_cast<std::size_t>(pow2_floor(std::pow(static_cast<double>(cap_), 1.0 / m.dim()) * (1.0 + 1e-12)));
    }

    const Profile& w() const { return w_; }
    double a(double t) const { return a_(t); }

    struct Term {
        double tau, coef;
        bool shifted;
    };

    // \int_{|x| > R} |sum_i coef_i K(tau_i, x - y 1_{shifted})| dx
    double l1(const std::vector<Term>& terms, double y, double R, double lambda) {
        double tmin = INFINITY, tmax = 0.0;
        for (const auto& t : terms) {
            tmin = std::min(tmin, t.tau);
            tmax = std::max(tmax, t.tau);
        }
        if (terms.empty()) return 0.0;
        const double far = std::max({a(tmax), R, std::fabs(y)});
        double h = pow2_floor(a(tmin) / pps_);
        const double P = pow2_ceil(pf_ * far);
        std::size_t M = static_cast<std::size_t>(std::llround(P / h));
        bool moll = false;
        if (M > Mcap_) {
            M = Mcap_;
            h = P / static_cast<double>(M);
            moll = true;
        }
        M = std::max<std::size_t>(M, 16);
        h = P / static_cast<double>(M);
        const Entry& e = entry(M, h);
        const std::size_t n = e.grid.size();
        auto build = [&](bool mollify, std::vector<cplx>& E) {
            E.assign(n, 0.0);
            const double sm = 2.0 * h;
            for (const auto& t : terms) {
                const double c = t.coef * std::exp(-lambda * t.tau);
                for (std::size_t k = 0; k < n; ++k) {
                    cplx v = c * e.op[k] * std::exp(t.tau * e.psi[k]);
                    if (t.shifted) v *= e.shift_phase(k, y);
                    E[k] += v;
                }
            }
            if (mollify)
                for (std::size_t k = 0; k < n; ++k) E[k] *= std::exp(-2.0 * M_PI * M_PI * sm * sm * e.r2[k]);
        };
        std::vector<cplx> E;
        build(moll, E);
        if (!moll) {
            double top = 0.0, shell = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                top = std::max(top, std::abs(E[k]));
                if (e.grid.on_nyquist_shell(k)) shell = std::max(shell, std::abs(E[k]));
            }
            if (shell > 1e-8 * top) build(true, E);
        }
        const auto v = inverse_transform(e.grid, std::move(E));
        const Lattice lat = e.grid.spatial();
        double s = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k)
            if (R <= 0.0 || lat.radius(k) > R) s += std::fabs(v[k]);
        return s * lat.cell_volume();
    }

private:
    struct Entry {
        FrequencyGrid grid;
        std::vector<cplx> psi, op;  // exponent of the density spectrum and the operator multiplier
        std::vector<double> r2, xi0;
        cplx shift_phase(std::size_t k, double y) const { return std::polar(1.0, -2.0 * M_PI * xi0[k] * y); }
    };

    const Entry& entry(std::size_t M, double h) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(M, h);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Entry e;
        e.grid = FrequencyGrid(m_.dim(), M, 0.5 / h);
        const SymbolField s = compute_symbol(m_, e.grid);
        const std::size_t n = e.grid.size();
        e.psi.resize(n);
        e.op.resize(n);
        e.r2.resize(n);
        e.xi0.resize(n);
        double xi[3];
        for (std::size_t k = 0; k < n; ++k) {
            // p^{nu*} has spectrum exp(t psi(xi)); p^nu has exp(t psi(-xi))
            e.psi[k] = reflect_ ? s.values[k] : s.values[e.grid.mirror(k)];
            e.op[k] = half_ ? cplx(-std::sqrt(std::max(0.0, -s.values[k].real()))) : s.values[k];
            e.grid.frequency(k, xi);
            double r2 = 0.0;
            for (int a = 0; a < e.grid.dim(); ++a) r2 += xi[a] * xi[a];
            e.r2[k] = r2;
            e.xi0[k] = xi[0];
        }
        return cache_.emplace(key, std::move(e)).first->second;
    }

    const LevyMeasure& m_;
    Profile w_;
    GeneralizedInverse a_;
    HormanderOptions opt_;
    bool half_, reflect_;
    int pps_;
    double pf_;
    std::size_t cap_, Mcap_;
    std::mutex mu_;
    std::map<std::pair<std::size_t, double>, Entry> cache_;
};

double gl_panel(const std::function<double(double)>& f, double u, double v) {
    const GaussRule& g = gauss_legendre(8);
    const double c = 0.5 * (u + v), r = 0.5 * (v - u);
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(c + r * g.x[i]);
    return s * r;
}

// panels doubling in width away from u
double graded(const std::function<double(double)>& f, double u, double v, double first) {
    double s = 0.0, a = u, wd = std::min(first, v - u);
    while (a < v) {
        const double b = std::min(v, a + wd);
        s += gl_panel(f, a, b);
        a = b;
        wd *= 2.0;
    }
    return s;
}

// [u, inf) with doubling panels and a geometric extrapolation of the remainder
double tail(const std::function<double(double)>& f, double u, double first, double done, double tol) {
    double s = 0.0, prev = -1.0, a = u, wd = first;
    for (int k = 0; k < 200; ++k) {
        const double I = gl_panel(f, a, a + wd);
        s += I;
        a += wd;
        wd *= 2.0;
        if (k >= 2 && prev > 0.0 && I < prev) {
            const double r = I / prev;
            const double rem = I * r / (1.0 - r);
            if (rem <= tol * (done + s)) return s + rem;
        }
        if (I == 0.0 && prev == 0.0 && k >= 4) return s;
        prev = I;
    }
    throw NumericalError("time integral of the kernel difference did not converge");
}

void check_sample(const Profile& w, const HormanderSample& smp) {
    if (!(smp.eta > 0.0)) throw PreconditionError("Hormander sample needs eta > 0");
    if (std::fabs(smp.s) > w(smp.eta) * (1.0 + 1e-12) || std::fabs(smp.y) > smp.eta * (1.0 + 1e-12))
        throw PreconditionError("Hormander sample rejected: need |s| <= w(eta) and |y| <= eta (s = " + format_double(smp.s) +
                                ", y = " + format_double(smp.y) + ", eta = " + format_double(smp.eta) + ")");
}

double box_integral(KernelEvaluator& K, const HormanderSample& smp, double eps, double C0, double lambda, double tol,
                    bool squared) {
    const double s = smp.s, y = smp.y;
    if (s == 0.0 && y == 0.0) return 0.0;
    const double w0 = K.w()(C0 * smp.eta), R = C0 * smp.eta;
    auto f = [&](double t) {
        std::vector<KernelEvaluator::Term> terms;
        if (t - s >= eps) terms.push_back({t - s, 1.0, true});
        if (t >= eps) terms.push_back({t, -1.0, false});
        const double v = K.l1(terms, y, std::fabs(t) < w0 ? R : 0.0, lambda);
        return squared ? v * v : v;
    };
    const double lo = eps + std::min(s, 0.0);
    std::vector<double> bp{eps, eps + s, w0, -w0};
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    double total = 0.0, u = lo;
    for (double v : bp) {
        if (v <= u) continue;
        const bool near_switch = std::fabs(u - eps) < 1e-15 * (1.0 + eps) || std::fabs(u - eps - s) < 1e-15 * (1.0 + eps) || u == lo;
        const double first = near_switch ? 0.25 * eps : 0.25 * std::max(std::fabs(u), eps);
        total += graded(f, u, v, first);
        u = v;
    }
    total += tail(f, u, 0.25 * std::max(std::fabs(u), eps), total, tol);
    return total;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

EstimateReport box_check(const LevyMeasure& m, const std::vector<HormanderSample>& samples, const HormanderOptions& opt,
                         bool stochastic) {
    if (samples.empty()) throw PreconditionError("Hormander check needs samples");
    if (opt.epsilons.empty()) throw PreconditionError("Hormander check needs at least one epsilon");
    const Profile w = w_profile(m);
    std::vector<double> etas;
    for (const auto& s : samples) {
        check_sample(w, s);
        etas.push_back(s.eta);
    }
    const double C0 = hormander_C0(w, etas);
    EstimateReport rep;
    rep.id = stochastic ? "stochastic_hormander" : "hormander";
    rep.param_names = {"s", "y", "eta", "eps", "level"};
    rep.drift_threshold = opt.refine_drift_limit;
    auto run = [&](double eps, int level) {
        std::vector<double> out(samples.size());
        parallel_for(samples.size(), [&](std::size_t b, std::size_t e) {
            KernelEvaluator K(m, opt, level, stochastic, true);
            for (std::size_t i = b; i < e; ++i)
                out[i] = box_integral(K, samples[i], eps, C0, opt.lambda, opt.tail_tol, stochastic);
        });
        return out;
    };
    std::vector<double> sups, spreads;
    double mid_sup = 0.0;
    const std::size_t mid = opt.epsilons.size() / 2;
    std::vector<double> all;
    for (std::size_t ie = 0; ie < opt.epsilons.size(); ++ie) {
        const double eps = opt.epsilons[ie];
        const auto v = run(eps, 0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            rep.samples.push_back({{samples[i].s, samples[i].y, samples[i].eta, eps, 0.0}, v[i], 1.0, v[i]});
            all.push_back(v[i]);
        }
        const double sup = *std::max_element(v.begin(), v.end());
        const double med = median_of(v);
        sups.push_back(sup);
        spreads.push_back(med > 0.0 ? sup / med : INFINITY);
        if (ie == mid) mid_sup = sup;
    }
    const auto fine = run(opt.epsilons[mid], 1);
    for (std::size_t i = 0; i < fine.size(); ++i)
        rep.samples.push_back({{samples[i].s, samples[i].y, samples[i].eta, opt.epsilons[mid], 1.0}, fine[i], 1.0, fine[i]});
    const double fine_sup = *std::max_element(fine.begin(), fine.end());
    rep.level_C = {mid_sup, fine_sup};
    rep.drift = std::fabs(fine_sup - mid_sup) / std::max(fine_sup, mid_sup);
    rep.C = *std::max_element(all.begin(), all.end());
    rep.median = median_of(all);
    const double smax = *std::max_element(sups.begin(), sups.end()), smin = *std::min_element(sups.begin(), sups.end());
    const double eps_drift = (smax - smin) / smax;
    const double spread = *std::max_element(spreads.begin(), spreads.end());
    rep.diagnostics = {{"C0", C0}, {"max_over_median", spread}, {"eps_drift", eps_drift}, {"refinement_drift", rep.drift}};
    bool finite = true;
    for (double v : all) finite &= std::isfinite(v);
    rep.pass = finite && spread <= opt.spread_limit && eps_drift < opt.eps_drift_limit && rep.drift < opt.refine_drift_limit;
    if (!finite) rep.warnings.push_back("non-finite kernel-difference integral");
    return rep;
}

}  // namespace

std::vector<HormanderSample> hormander_samples(const LevyMeasure& m, std::size_t n, double eta_lo, double eta_hi) {
    if (n == 0 || !(eta_lo > 0.0 && eta_hi >= eta_lo)) throw PreconditionError("bad Hormander sample range");
    const Profile w = w_profile(m);
    static const double sf[] = {1.0, -1.0, 0.5, -0.3, 0.8};
    static const double yf[] = {1.0, 0.5, -1.0, 0.2};
    std::vector<HormanderSample> out;
    const auto etas = n == 1 ? std::vector<double>{eta_lo} : logspace(eta_lo, eta_hi, n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({sf[i % 5] * w(etas[i]), yf[i % 4] * etas[i], etas[i]});
    return out;
}

double hormander_C0(const Profile& w, const std::vector<double>& etas) {
    for (double C = 4.0; C <= 1024.0; C += 1.0) {
        bool ok = true;
        for (double eta : etas) ok &= w(C * eta) > 3.0 * w(eta);
        if (ok) return C;
    }
    throw NumericalError("no C0 <= 1024 with w(C0 eta) > 3 w(eta) on the sampled etas");
}

double hormander_integral(const LevyMeasure& m, const HormanderSample& smp, double eps, double C0,
                          const HormanderOptions& opt, int level) {
    KernelEvaluator K(m, opt, level, false, true);
    check_sample(K.w(), smp);
    return box_integral(K, smp, eps, C0, opt.lambda, opt.tail_tol, false);
}

double stochastic_hormander_integral(const LevyMeasure& m, const HormanderSample& smp, double eps, double C0,
                                     const HormanderOptions& opt, int level) {
    KernelEvaluator K(m, opt, level, true, true);
    check_sample(K.w(), smp);
    return box_integral(K, smp, eps, C0, opt.lambda, opt.tail_tol, true);
}

EstimateReport hormander_check(const LevyMeasure& m, const std::vector<HormanderSample>& samples,
                               const HormanderOptions& opt) {
    return box_check(m, samples, opt, false);
}

EstimateReport stochastic_hormander_check(const LevyMeasure& m, const std::vector<HormanderSample>& samples,
                                          const HormanderOptions& opt) {
    return box_check(m, samples, opt, true);
}

double fractional_time_difference(const LevyMeasure& m, double s, double b, const HormanderOptions& opt, int level) {
    if (!(b > 0.0) || std::fabs(s) > b) throw PreconditionError("time-difference check needs |s| <= b and b > 0");
    if (s == 0.0) return 0.0;
    KernelEvaluator K(m, opt, level, true, false);
    auto f = [&](double t) {
        const double v = K.l1({{t - s, 1.0, false}, {t, -1.0, false}}, 0.0, 0.0, 0.0);
        return v * v;
    };
    return tail(f, 2.0 * b, 0.25 * b, 0.0, opt.tail_tol);
}

EstimateReport fractional_time_difference_check(const LevyMeasure& m, const std::vector<std::pair<double, double>>& sb,
                                                const HormanderOptions& opt) {
    if (sb.empty()) throw PreconditionError("time-difference check needs (s, b) pairs");
    EstimateReport rep;
    rep.id = "fractional_time_difference";
    rep.param_names = {"s", "b", "level"};
    rep.drift_threshold = opt.refine_drift_limit;
    std::vector<double> v(sb.size()), fine(sb.size());
    parallel_for(sb.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            v[i] = fractional_time_difference(m, sb[i].first, sb[i].second, opt, 0);
            fine[i] = fractional_time_difference(m, sb[i].first, sb[i].second, opt, 1);
        }
    });
    for (std::size_t i = 0; i < sb.size(); ++i) {
        rep.samples.push_back({{sb[i].first, sb[i].second, 0.0}, v[i], 1.0, v[i]});
        rep.samples.push_back({{sb[i].first, sb[i].second, 1.0}, fine[i], 1.0, fine[i]});
    }
    const double c0 = *std::max_element(v.begin(), v.end()), c1 = *std::max_element(fine.begin(), fine.end());
    rep.C = std::max(c0, c1);
    rep.median = median_of(v);
    rep.level_C = {c0, c1};
    rep.drift = std::fabs(c1 - c0) / std::max(c0, c1);
    const double spread = rep.median > 0.0 ? c0 / rep.median : INFINITY;
    rep.diagnostics = {{"max_over_median", spread}, {"refinement_drift", rep.drift}};
    rep.pass = std::isfinite(rep.C) && spread <= opt.spread_limit && rep.drift < opt.refine_drift_limit;
    return rep;
}

}  // namespace levy
