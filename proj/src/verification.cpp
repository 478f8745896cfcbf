#include "levy/verification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "levy/densities.hpp"
#include "levy/error.hpp"
#include "levy/parallel.hpp"
#include "levy/process.hpp"
#include "levy/rng.hpp"
#include "levy/special.hpp"

namespace levy {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rel_change(double a, double b) {
    const double m = std::max(std::fabs(a), std::fabs(b));
    return m > 0.0 ? std::fabs(a - b) / m : 0.0;
}

// F^{-1}[m F f] with the multiplier on the lattice's frequency grid
std::vector<double> apply_values(const Lattice& lat, const std::vector<double>& f, const std::vector<cplx>& m) {
    return apply_multiplier(lat, f, m);
}

// trapezoid of ||v_k||_p^p over the time nodes
double time_lp(const Lattice& lat, const std::vector<double>& t, const std::vector<std::vector<double>>& v, double p) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k)
        s += 0.5 * (t[k + 1] - t[k]) * (std::pow(lp_norm(lat, v[k], p), p) + std::pow(lp_norm(lat, v[k + 1], p), p));
    return s;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) s += 0.5 * (t[k + 1] - t[k]) * (y[k] + y[k + 1]);
    return s;
}

void summarize(EstimateReport& r) {
    std::vector<double> ratios;
    for (const auto& s : r.samples) ratios.push_back(s.ratio);
    r.C = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
    r.median = median_of(ratios);
}

}  // namespace

double EstimateReport::diagnostic(const std::string& key) const {
    for (const auto& [k, v] : diagnostics)
        if (k == key) return v;
    return NAN;
}

std::string report_json(const EstimateReport& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["param_names"] = r.param_names;
    auto& s = j["samples"] = nlohmann::json::array();
    for (const auto& e : r.samples) s.push_back({{"params", e.params}, {"lhs", e.lhs}, {"rhs", e.rhs}, {"ratio", e.ratio}});
    j["C"] = r.C;
    j["median"] = r.median;
    j["level_C"] = r.level_C;
    j["drift"] = r.drift;
    j["drift_threshold"] = r.drift_threshold;
    auto& d = j["diagnostics"] = nlohmann::json::object();
    for (const auto& [k, v] : r.diagnostics) d[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    j["warnings"] = r.warnings;
    j["pass"] = r.pass;
    return j.dump(2);
}

void write_report_csv(const std::string& path, const EstimateReport& r) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f.precision(17);
    for (const auto& n : r.param_names) f << n << ",";
    f << "lhs,rhs,ratio\n";
    for (const auto& s : r.samples) {
        for (double v : s.params) f << v << ",";
        f << s.lhs << "," << s.rhs << "," << s.ratio << "\n";
    }
}

// ---- initial-value estimate

double initial_lhs(const SymbolField& psi, const std::vector<double>& g, double lambda, double T, double p) {
    const Lattice lat = psi.grid.spatial();
    if (g.size() != lat.size()) throw PreconditionError("g does not live on the symbol's lattice");
    const auto G = dft_real(lat, g);
    auto f = [&](double t) {
        std::vector<cplx> s(G.size());
        for (std::size_t k = 0; k < s.size(); ++k) s[k] = psi.values[k] * std::exp(t * (psi.values[k] - lambda)) * G[k];
        std::vector<double> out;
        idft_real(lat.dim(), lat.M(), s, out);
        return std::pow(lp_norm(lat, out, p), p);
    };
    const GaussRule& gl = gauss_legendre(8);
    double s = 0.0, a = 0.0, wd = T * 1e-7;
    while (a < T) {
        const double b = std::min(T, a + wd), c = 0.5 * (a + b), r = 0.5 * (b - a);
        for (std::size_t i = 0; i < gl.x.size(); ++i) s += r * gl.w[i] * f(c + r * gl.x[i]);
        a = b;
        wd *= 2.0;
    }
    return std::pow(s, 1.0 / p);
}

EstimateReport initial_estimate_check(const LevyMeasure& m, const std::vector<EstimateGrid>& levels,
                                      const std::vector<std::vector<double>>& family_per_level, double lambda, double p,
                                      double besov_s, double drift_limit) {
    if (levels.empty()) throw PreconditionError("initial estimate needs at least one lattice level");
    if (family_per_level.size() % levels.size() != 0 || family_per_level.empty())
        throw PreconditionError("family_per_level must hold the same number of functions for every level");
    const std::size_t nf = family_per_level.size() / levels.size();
    const double s = std::isnan(besov_s) ? 1.0 - 1.0 / p : besov_s;
    EstimateReport rep;
    rep.id = "initial_estimate";
    rep.param_names = {"level", "member", "p", "s", "lambda"};
    rep.drift_threshold = drift_limit;
    const Profile w = w_profile(m);
    std::vector<double> half_C;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const auto& lv = levels[l];
        const SymbolField psi = compute_symbol(m, lv.grid);
        const DyadicSystem sys(lv.N, lv.grid);
        const Lattice lat = lv.grid.spatial();
        std::vector<EstimateSample> rows(nf);
        parallel_for(nf, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto& g = family_per_level[l * nf + i];
                const double lhs = initial_lhs(psi, g, lambda, lv.T, p);
                const double rhs = besov_norm(MarkedField::unmarked(lat, g), sys, NormSpec{s, p, p, 0.0, w}).value;
                rows[i] = {{double(l), double(i), p, s, lambda}, lhs, rhs, rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0)};
            }
        });
        double c = 0.0, ch = 0.0;
        for (std::size_t i = 0; i < nf; ++i) {
            c = std::max(c, rows[i].ratio);
            if (i < (nf + 1) / 2) ch = std::max(ch, rows[i].ratio);
            rep.samples.push_back(rows[i]);
        }
        rep.level_C.push_back(c);
        half_C.push_back(ch);
    }
    summarize(rep);
    const auto [lo, hi] = std::minmax_element(rep.level_C.begin(), rep.level_C.end());
    rep.drift = *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
    const double enrich = rel_change(half_C.back(), rep.level_C.back());
    rep.diagnostics = {{"enrichment_drift", enrich}, {"besov_s", s}};
    rep.pass = std::isfinite(rep.C) && rep.drift < drift_limit && enrich < drift_limit;
    return rep;
}

std::vector<double> random_band_limited(const Lattice& lat, double xi_max, std::uint64_t seed, std::uint64_t index, int terms,
                                        double xi_min) {
    if (!(xi_max > 0.0) || !(xi_min >= 0.0 && xi_min <= xi_max)) throw PreconditionError("need 0 <= xi_min <= xi_max, xi_max > 0");
    Stream rng(seed, index, purpose::inputs);
    const double P = lat.period();
    std::vector<double> f(lat.size(), 0.0);
    double x[3];
    for (int k = 0; k < terms; ++k) {
        const double amp = rng.normal();
        const double xi = xi_min + (xi_max - xi_min) * std::pow(rng.uniform(), 2.0);
        const double phase = 2.0 * M_PI * rng.uniform();
        const double l = std::min(P / 16.0, 0.5 + 2.5 * rng.uniform());
        double c[3] = {0.0, 0.0, 0.0}, dir[3] = {1.0, 0.0, 0.0};
        for (int a = 0; a < lat.dim(); ++a) c[a] = (rng.uniform() - 0.5) * P / 8.0;
        if (lat.dim() > 1) {
            double n2 = 0.0;
            for (int a = 0; a < lat.dim(); ++a) {
                dir[a] = rng.normal();
                n2 += dir[a] * dir[a];
            }
            for (int a = 0; a < lat.dim(); ++a) dir[a] /= std::sqrt(n2);
        }
        for (std::size_t n = 0; n < f.size(); ++n) {
            lat.coordinates(n, x);
            double r2 = 0.0, ph = 0.0;
            for (int a = 0; a < lat.dim(); ++a) {
                r2 += (x[a] - c[a]) * (x[a] - c[a]);
                ph += dir[a] * x[a];
            }
            f[n] += amp * std::cos(2.0 * M_PI * xi * ph + phase) * std::exp(-M_PI * r2 / (l * l));
        }
    }
    return f;
}

double sweep_bound(double xi_max, std::size_t i, std::size_t n) {
    return n < 2 ? xi_max : xi_max * std::pow(2.0, 4.0 * (double(i) / double(n - 1) - 1.0));
}

std::vector<std::vector<double>> mixed_family(const Lattice& lat, double xi_max, std::size_t n, std::uint64_t seed) {
    std::vector<std::vector<double>> fam;
    for (std::size_t i = 0; i < n; ++i) {
        const double b = sweep_bound(xi_max, i, n);
        fam.push_back(random_band_limited(lat, b, seed, i, 3, 0.5 * b));
    }
    return fam;
}

// ---- a priori estimate

APrioriReport apriori_estimate_check(const LevyMeasure& m, const EstimateGrid& level, const APrioriInputs& in, double p,
                                     double lambda) {
    if (!(p > 1.0)) throw PreconditionError("a priori estimate needs p > 1");
    if (in.marks == 0 || in.marks > 8) throw PreconditionError("mark space must satisfy 1 <= |U_n| <= 8");
    if (in.members == 0 || in.paths == 0) throw PreconditionError("a priori estimate needs members and paths");
    const Lattice lat = level.grid.spatial();
    const SymbolField psi = compute_symbol(m, level.grid);
    SymbolField sym = psi;
    for (auto& v : sym.values) v = v.real();
    const DyadicSystem sys(level.N, level.grid);
    const Profile w = w_profile(m);
    const double T = level.T;
    const std::size_t K = level.time_steps;
    std::vector<double> t(K + 1);
    for (std::size_t k = 0; k <= K; ++k) t[k] = T * std::pow(double(k) / double(K), 2.0);  // graded toward 0
    const double rho = lambda > 0.0 ? std::min(1.0 / lambda, T) : T;
    const bool two_branch = p >= 2.0;

    APrioriReport out;
    out.rows.resize(in.members);
    parallel_for(in.members, [&](std::size_t b, std::size_t e) {
        for (std::size_t mb = b; mb < e; ++mb) {
            const std::uint64_t base = 64 * mb;
            const double xb = in.frequency_sweep ? sweep_bound(in.xi_max, mb, in.members) : in.xi_max;
            const double xa = in.frequency_sweep ? 0.5 * xb : 0.0;
            InputData d;
            d.lattice = lat;
            d.lambda = lambda;
            d.T = T;
            if (in.use_g) d.g = random_band_limited(lat, xb, in.seed, base, 3, xa);
            if (in.use_f) {
                const auto f1 = random_band_limited(lat, xb, in.seed, base + 1, 3, xa);
                const auto f2 = random_band_limited(lat, xb, in.seed, base + 2, 3, xa);
                d.f.times = t;
                for (double tk : t) {
                    std::vector<double> v(lat.size());
                    const double c = std::cos(2.0 * M_PI * tk / T), s = std::sin(2.0 * M_PI * tk / T);
                    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * f1[i] + s * f2[i];
                    d.f.values.push_back(std::move(v));
                }
            }
            MarkIntensity pi;
            if (in.use_phi) {
                Stream wr(in.seed, base + 3, purpose::inputs);
                std::vector<std::vector<double>> shapes;
                std::vector<double> omega;
                for (std::size_t z = 0; z < in.marks; ++z) {
                    pi.weights.push_back(0.5 + 1.5 * wr.uniform());
                    omega.push_back(1.0 + 3.0 * wr.uniform());
                    shapes.push_back(random_band_limited(lat, xb, in.seed, base + 8 + z, 3, xa));
                }
                d.Phi.times = t;
                d.Phi.weights = pi.weights;
                for (double tk : t) {
                    std::vector<std::vector<double>> node;
                    for (std::size_t z = 0; z < in.marks; ++z) {
                        auto v = shapes[z];
                        const double c = 1.0 + 0.5 * std::cos(omega[z] * tk);
                        for (auto& x : v) x *= c;
                        node.push_back(std::move(v));
                    }
                    d.Phi.values.push_back(std::move(node));
                }
            }

            APrioriRow row{};
            row.member = mb;
            // input norms
            if (in.use_f) row.f = std::pow(time_lp(lat, t, d.f.values, p), 1.0 / p);
            if (in.use_g) {
                const auto G = MarkedField::unmarked(lat, d.g);
                const double sg = std::isnan(in.g_besov_s) ? 1.0 - 1.0 / p : in.g_besov_s;
                row.g_besov = besov_norm(G, sys, NormSpec{sg, p, p, 0.0, w}).value;
                row.g_lp = lp_norm(lat, d.g, p);
            }
            if (in.use_phi) {
                std::vector<double> nb(K + 1), nl(K + 1), nh(K + 1), n2(K + 1);
                for (std::size_t k = 0; k <= K; ++k) {
                    const MarkedField F{lat, d.Phi.values[k], pi.weights};
                    nb[k] = std::pow(besov_norm(F, sys, NormSpec{1.0 - 1.0 / p, p, p, p, w}).value, p);
                    nl[k] = std::pow(bessel_norm_via_J(F, sym, NormSpec{0.0, p, p, p, w}).value, p);
                    if (two_branch) {
                        nh[k] = std::pow(bessel_norm_via_J(F, sym, NormSpec{0.5, p, p, 2.0, w}).value, p);
                        n2[k] = std::pow(bessel_norm_via_J(F, sym, NormSpec{0.0, p, p, 2.0, w}).value, p);
                    }
                }
                row.phi_besov = std::pow(trapezoid(t, nb), 1.0 / p);
                row.phi_lp = std::pow(trapezoid(t, nl), 1.0 / p);
                row.phi_h2 = std::pow(trapezoid(t, nh), 1.0 / p);
                row.phi_l2 = std::pow(trapezoid(t, n2), 1.0 / p);
            }

            // deterministic part once, the noise per path
            InputData det = d;
            det.Phi = {};
            const SolutionField u0 = solve(psi, det, JumpSample{}, t);
            double sumL = 0.0, sumU = 0.0;
            const std::size_t npath = in.use_phi ? in.paths : 1;
            for (std::size_t ip = 0; ip < npath; ++ip) {
                std::vector<std::vector<double>> u = u0.u;
                if (in.use_phi) {
                    const auto jumps = simulate_poisson_measure(pi, T, in.seed, mb * in.paths + ip);
                    const auto r = stochastic_convolution(psi, lambda, d.Phi, jumps);
                    for (std::size_t k = 0; k <= K; ++k)
                        for (std::size_t i = 0; i < lat.size(); ++i) u[k][i] += r.values[k][i];
                }
                std::vector<std::vector<double>> Lu(K + 1);
                for (std::size_t k = 0; k <= K; ++k) Lu[k] = apply_values(lat, u[k], psi.values);
                sumL += time_lp(lat, t, Lu, p);
                sumU += time_lp(lat, t, u, p);
            }
            row.Lu = std::pow(sumL / double(npath), 1.0 / p);
            row.u = std::pow(sumU / double(npath), 1.0 / p);
            row.rhs_L = row.f + row.g_besov + row.phi_besov + (two_branch ? row.phi_h2 : 0.0);
            row.rhs_u = rho * row.f + std::pow(rho, 1.0 / p) * (row.g_lp + row.phi_lp) + (two_branch ? std::sqrt(rho) * row.phi_l2 : 0.0);
            row.ratio_L = row.rhs_L > 0.0 ? row.Lu / row.rhs_L : 0.0;
            row.ratio_u = row.rhs_u > 0.0 ? row.u / row.rhs_u : 0.0;
            out.rows[mb] = row;
        }
    });

    for (auto* r : {&out.L, &out.u}) {
        r->param_names = {"member", "p", "lambda", "M", "extent"};
        r->drift_threshold = 0.25;
    }
    out.L.id = "apriori_Lu";
    out.u.id = "apriori_u";
    double hL = 0.0, hU = 0.0;
    for (const auto& row : out.rows) {
        const std::vector<double> par{double(row.member), p, lambda, double(level.grid.M()), level.grid.extent()};
        out.L.samples.push_back({par, row.Lu, row.rhs_L, row.ratio_L});
        out.u.samples.push_back({par, row.u, row.rhs_u, row.ratio_u});
        if (row.member < (in.members + 1) / 2) {
            hL = std::max(hL, row.ratio_L);
            hU = std::max(hU, row.ratio_u);
        }
    }
    summarize(out.L);
    summarize(out.u);
    out.L.level_C = {out.L.C};
    out.u.level_C = {out.u.C};
    out.L.diagnostics = {{"enrichment_drift", rel_change(hL, out.L.C)}, {"rho", rho}};
    out.u.diagnostics = {{"enrichment_drift", rel_change(hU, out.u.C)}, {"rho", rho}};
    out.L.pass = std::isfinite(out.L.C) && out.L.diagnostic("enrichment_drift") < 0.25;
    out.u.pass = std::isfinite(out.u.C) && out.u.diagnostic("enrichment_drift") < 0.25;
    return out;
}

// ---- fractional representation

double fractional_constant(double delta) { return delta / std::tgamma(1.0 - delta); }

namespace {

// periodic cubic Lagrange interpolation along each axis (d <= 3)
double periodic_cubic(const Lattice& lat, const std::vector<double>& v, const double* x) {
    const int d = lat.dim();
    const std::size_t M = lat.M();
    const double h = lat.h();
    long base[3];
    double wts[3][4];
    for (int a = 0; a < d; ++a) {
        const double u = x[a] / h + double(M / 2);
        const double fl = std::floor(u);
        const double s = u - fl;
        base[a] = static_cast<long>(fl) - 1;
        wts[a][0] = -s * (s - 1.0) * (s - 2.0) / 6.0;
        wts[a][1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        wts[a][2] = -(s + 1.0) * s * (s - 2.0) / 2.0;
        wts[a][3] = (s + 1.0) * s * (s - 1.0) / 6.0;
    }
    const long Ml = static_cast<long>(M);
    auto wrap = [&](long i) { return static_cast<std::size_t>(((i % Ml) + Ml) % Ml); };
    double out = 0.0;
    const int combos = d == 1 ? 4 : d == 2 ? 16 : 64;
    for (int c = 0; c < combos; ++c) {
        std::size_t idx = 0;
        double wt = 1.0;
        int cc = c;
        for (int a = 0; a < d; ++a) {
            const int o = cc % 4;
            cc /= 4;
            idx = idx * M + wrap(base[a] + o);
            wt *= wts[a][o];
        }
        out += wt * v[idx];
    }
    return out;
}

}  // namespace

FractionalRoute fractional_routes(const LevyMeasure& m0, double delta, const Lattice& lat, const std::vector<double>& f,
                                  const FractionalOptions& opt) {
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("fractional order must lie in (0, 1)");
    if (f.size() != lat.size()) throw PreconditionError("f does not live on the lattice");
    if (!(opt.split > 0.0 && opt.t_max > opt.split)) throw PreconditionError("need 0 < split < t_max");
    const LevyMeasure m = m0.symmetric() ? m0 : m0.symmetrized();
    const int d = lat.dim();
    const FrequencyGrid grid = lat.frequency_grid();
    const SymbolField psi = compute_symbol(m, grid);
    std::vector<cplx> frac(psi.values.size());
    for (std::size_t k = 0; k < frac.size(); ++k) frac[k] = -std::pow(std::max(0.0, -psi.values[k].real()), delta);
    const auto spectral = apply_multiplier(lat, f, frac);
    const LevyMeasure mp = !opt.path_measure ? m : opt.path_measure->symmetric() ? *opt.path_measure : opt.path_measure->symmetrized();
    if (mp.dim() != d) throw PreconditionError("path measure and lattice dimensions differ");
    const auto Lf = apply_multiplier(lat, f, opt.path_measure ? compute_symbol(mp, grid).values : psi.values);

    FractionalRoute out;
    // evaluation points: lattice nodes along the first axis through the centre
    const std::size_t M = lat.M(), stride = lat.size() / M;
    const std::size_t np = std::min(opt.points, M / 4);
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < np; ++i) {
        const std::size_t ax = M / 2 - M / 8 + (M / 4) * i / np;
        std::size_t centre = 0;
        for (int a = 1; a < d; ++a) centre = centre * M + M / 2;
        nodes.push_back(ax * stride + centre);
    }
    double xc[3];
    std::vector<std::array<double, 3>> X;
    for (auto n : nodes) {
        lat.coordinates(n, xc);
        X.push_back({xc[0], d > 1 ? xc[1] : 0.0, d > 2 ? xc[2] : 0.0});
        out.x.push_back(xc[0]);
        out.spectral.push_back(spectral[n]);
    }

    // time nodes: graded geometric on (0, a], geometric on [a, t_max]
    const double a = opt.split;
    const double q = std::pow(10.0, 1.0 / double(opt.nodes_per_decade));
    std::vector<double> r{0.0};
    {
        std::vector<double> inner;
        for (double v = a; v > a * 1e-7; v /= q) inner.push_back(v);
        std::reverse(inner.begin(), inner.end());
        r.insert(r.end(), inner.begin(), inner.end());
    }
    const std::size_t n_inner = r.size();  // r[n_inner - 1] == a
    for (double v = a * q; v < opt.t_max * (1.0 + 1e-12); v *= q) r.push_back(v);
    const double tmax = r.back();

    // product-integration weights for piecewise-linear integrands
    // inner: \int_0^a g(r) (r^{-delta} - a^{-delta}) / delta dr; outer: \int_a^tmax G(t) t^{-delta-1} dt
    std::vector<double> wi(n_inner, 0.0), wo(r.size(), 0.0);
    auto Ipow = [](double u, double v, double e) { return (std::pow(v, e) - std::pow(u, e)) / e; };  // \int_u^v r^{e-1}
    const double ad = std::pow(a, -delta);
    for (std::size_t k = 0; k + 1 < n_inner; ++k) {
        const double u = r[k], v = r[k + 1], L = v - u;
        // hat functions (v - r)/L on node k and (r - u)/L on node k+1
        const double m0w = Ipow(u, v, 1.0 - delta), m1w = Ipow(u, v, 2.0 - delta);
        const double A0 = (v * m0w - m1w) / L, A1 = (m1w - u * m0w) / L;
        const double B0 = 0.5 * L, B1 = 0.5 * L;
        wi[k] += (A0 - ad * B0) / delta;
        wi[k + 1] += (A1 - ad * B1) / delta;
    }
    for (std::size_t k = n_inner - 1; k + 1 < r.size(); ++k) {
        const double u = r[k], v = r[k + 1], L = v - u;
        const double i0 = (std::pow(u, -delta) - std::pow(v, -delta)) / delta, i1 = Ipow(u, v, 1.0 - delta);
        wo[k] += (v * i0 - i1) / L;
        wo[k + 1] += (i1 - u * i0) / L;
    }
    // beyond t_max the path has mixed over the period: G -> mean(f) - f(x)
    const double tail = std::pow(tmax, -delta) / delta;
    double fbar = 0.0;
    for (double v : f) fbar += v;
    fbar /= double(f.size());

    // increment laws per interval
    const GeneralizedInverse ainv(w_profile(mp));
    std::vector<JumpLaw> laws;
    for (std::size_t k = 0; k + 1 < r.size(); ++k) laws.emplace_back(mp, opt.jump_factor * ainv(r[k + 1] - r[k]));

    const std::size_t n = nodes.size();
    std::vector<double> sum(n, 0.0), sq(n, 0.0);
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(opt.paths, 64));
    std::vector<std::vector<double>> csum(chunks, std::vector<double>(n, 0.0)), csq(chunks, std::vector<double>(n, 0.0));
    parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
        std::vector<double> Z(static_cast<std::size_t>(d), 0.0), inc(static_cast<std::size_t>(d));
        std::vector<std::vector<double>> path(r.size(), std::vector<double>(static_cast<std::size_t>(d)));
        std::vector<double> val(n);
        for (std::size_t c = cb; c < ce; ++c) {
            for (std::size_t ip = c; ip < opt.paths; ip += chunks) {
                Stream rng(opt.seed, ip, purpose::levy_path);
                std::fill(Z.begin(), Z.end(), 0.0);
                path[0] = Z;
                for (std::size_t k = 0; k + 1 < r.size(); ++k) {
                    levy_increment(laws[k], r[k + 1] - r[k], true, rng, inc.data());
                    for (int ax = 0; ax < d; ++ax) Z[ax] += inc[ax];
                    path[k + 1] = Z;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double f0 = f[nodes[i]];
                    double v = 0.0, y[3];
                    for (std::size_t k = 0; k < r.size(); ++k) {
                        for (int ax = 0; ax < d; ++ax) y[ax] = X[i][ax] + path[k][ax];
                        if (k < n_inner) v += wi[k] * periodic_cubic(lat, Lf, y);
                        if (k + 1 >= n_inner) v += wo[k] * (periodic_cubic(lat, f, y) - f0);
                    }
                    v += tail * (fbar - f0);
                    csum[c][i] += v;
                    csq[c][i] += v * v;
                }
            }
        }
    });
    for (std::size_t c = 0; c < chunks; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            sum[i] += csum[c][i];
            sq[i] += csq[c][i];
        }
    const double N = double(opt.paths);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = sum[i] / N;
        const double var = std::max(0.0, sq[i] / N - mean * mean) * N / std::max(1.0, N - 1.0);
        out.mc_raw.push_back(mean);
        out.se_raw.push_back(std::sqrt(var / N));
    }
    return out;
}

EstimateReport fractional_representation_check(const LevyMeasure& m, double delta, const Lattice& lat,
                                               const std::vector<std::vector<double>>& family, const FractionalOptions& opt) {
    if (family.size() < 2) throw PreconditionError("fractional check needs a reference function and at least one test function");
    EstimateReport rep;
    rep.id = "fractional_representation";
    rep.param_names = {"member", "delta", "relative_se"};
    std::vector<FractionalRoute> routes;
    for (const auto& f : family) routes.push_back(fractional_routes(m, delta, lat, f, opt));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < routes[0].x.size(); ++i) {
        num += routes[0].spectral[i] * routes[0].mc_raw[i];
        den += routes[0].mc_raw[i] * routes[0].mc_raw[i];
    }
    if (!(den > 0.0)) throw PreconditionError("reference function gives a zero Monte Carlo route");
    const double c = num / den;
    bool ok = true;
    double worst = 0.0;
    for (std::size_t j = 0; j < routes.size(); ++j) {
        const auto& R = routes[j];
        double e2 = 0.0, s2 = 0.0, se2 = 0.0;
        for (std::size_t i = 0; i < R.x.size(); ++i) {
            e2 += std::pow(c * R.mc_raw[i] - R.spectral[i], 2);
            s2 += R.spectral[i] * R.spectral[i];
            se2 += std::pow(c * R.se_raw[i], 2);
        }
        if (s2 == 0.0) {
            rep.samples.push_back({{double(j), delta, 0.0}, std::sqrt(e2), 0.0, std::sqrt(e2) == 0.0 ? 0.0 : INFINITY});
            ok &= e2 == 0.0;
            continue;
        }
        const double D = std::sqrt(e2 / s2), SE = std::sqrt(se2 / s2);
        const double ratio = SE > 0.0 ? D / SE : (D == 0.0 ? 0.0 : INFINITY);
        rep.samples.push_back({{double(j), delta, SE}, D, SE, ratio});
        if (j > 0) {
            ok &= ratio <= 3.0;
            worst = std::max(worst, ratio);
        }
    }
    summarize(rep);
    const double ca = fractional_constant(delta);
    // refinement: calibrate again with twice the time nodes
    FractionalOptions fine = opt;
    fine.nodes_per_decade *= 2;
    const auto R2 = fractional_routes(m, delta, lat, family[0], fine);
    double n2 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < R2.x.size(); ++i) {
        n2 += R2.spectral[i] * R2.mc_raw[i];
        d2 += R2.mc_raw[i] * R2.mc_raw[i];
    }
    const double c2 = n2 / d2;
    rep.level_C = {c, c2};
    rep.drift = rel_change(c, c2);
    rep.drift_threshold = 0.05;
    rep.diagnostics = {{"c_calibrated", c},
                       {"c_refined", c2},
                       {"c_analytic", ca},
                       {"calibration_vs_analytic", rel_change(c, ca)},
                       {"worst_discrepancy_in_se", worst},
                       {"paths", double(opt.paths)}};
    rep.pass = ok && rep.drift < rep.drift_threshold;
    return rep;
}

APrioriReport apriori_refinement_check(const LevyMeasure& m, const std::vector<EstimateGrid>& levels,
                                       const APrioriInputs& in, double p, double lambda, double drift_limit) {
    if (levels.empty()) throw PreconditionError("a priori estimate needs at least one lattice level");
    APrioriReport out;
    double enrich_L = 0.0, enrich_u = 0.0;
    for (const auto& lv : levels) {
        auto r = apriori_estimate_check(m, lv, in, p, lambda);
        if (out.rows.empty()) {
            out.L = r.L;
            out.u = r.u;
            out.L.samples.clear();
            out.u.samples.clear();
            out.L.level_C.clear();
            out.u.level_C.clear();
        }
        for (auto pr : {std::make_pair(&out.L, &r.L), std::make_pair(&out.u, &r.u)}) {
            pr.first->samples.insert(pr.first->samples.end(), pr.second->samples.begin(), pr.second->samples.end());
            pr.first->level_C.push_back(pr.second->C);
        }
        enrich_L = std::max(enrich_L, r.L.diagnostic("enrichment_drift"));
        enrich_u = std::max(enrich_u, r.u.diagnostic("enrichment_drift"));
        out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    }
    for (auto [r, enrich] : {std::make_pair(&out.L, enrich_L), std::make_pair(&out.u, enrich_u)}) {
        const double rho = r->diagnostic("rho");
        summarize(*r);
        const auto [lo, hi] = std::minmax_element(r->level_C.begin(), r->level_C.end());
        r->drift = *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
        r->drift_threshold = drift_limit;
        r->diagnostics = {{"enrichment_drift", enrich}, {"rho", rho}, {"levels", double(levels.size())}};
        r->pass = std::isfinite(r->C) && r->drift < drift_limit && enrich < drift_limit;
    }
    return out;
}

}  // namespace levy
