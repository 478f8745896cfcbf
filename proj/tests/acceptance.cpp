// Acceptance run: one line per criterion, exit status 1 if any criterion fails.
// usage: levy_acceptance <levy-orv binary> <source dir> <work dir>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "levy/densities.hpp"
#include "levy/error.hpp"
#include "levy/measures.hpp"
#include "levy/orv.hpp"
#include "levy/process.hpp"
#include "levy/solver.hpp"
#include "levy/spaces.hpp"
#include "levy/special.hpp"
#include "levy/symbols.hpp"
#include "levy/verification.hpp"

using namespace levy;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

LevyMeasure piecewise_power() {
    std::vector<double> r, d;
    for (double x : logspace(1e-8, 1e8, 129)) {
        r.push_back(x);
        d.push_back(x <= 1.0 ? std::pow(x, -0.5) : std::pow(x, -1.5));
    }
    return LevyMeasure::tabulated(1, 0.5, r, d);
}

std::vector<double> bump(const Lattice& lat, double width, double shift = 0.0) {
    std::vector<double> f(lat.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double x = lat.axis_coordinate(k) - shift;
        f[k] = std::exp(-M_PI * x * x / (width * width));
    }
    return f;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
    return e;
}

Profile power(double c, double s) {
    return [c, s](double r) { return c * std::pow(r, s); };
}

// 1. closed-form Cauchy density
void c1(Outcome& o) {
    const auto p = density(compute_symbol(LevyMeasure::stable(1, 1.0), FrequencyGrid(1, 1 << 14, 32.0)), 1.0);
    double err = 0.0;
    for (std::size_t k = 0; k < p.values.size(); ++k) {
        const double x = p.lattice.axis_coordinate(k);
        if (std::fabs(x) <= 10.0) err = std::max(err, std::fabs(p.values[k] - 1.0 / (M_PI * M_PI + x * x)));
    }
    o.detail << "max error on |x|<=10 " << err;
    o.require(err <= 1e-4, "error <= 1e-4");
}

// 2. mass conservation
void c2(Outcome& o) {
    const FrequencyGrid g(1, 1 << 16, 2048.0);
    double worst = 0.0;
    for (const auto& m : {LevyMeasure::stable(1, 1.0), piecewise_power()}) {
        const auto psi = compute_symbol(m, g);
        for (double t : {0.25, 1.0, 4.0}) worst = std::max(worst, std::fabs(density(psi, t).mass() - 1.0));
    }
    o.detail << "max |mass - 1| " << worst;
    o.require(worst <= 1e-6, "mass within 1e-6");
}

// 3. scaling identity
void c3(Outcome& o) {
    const auto st = LevyMeasure::stable(1, 1.0);
    const auto rs = scaling_identity_check(st, GeneralizedInverse(w_profile(st)), {0.25, 1.0, 4.0}, FrequencyGrid(1, 1 << 14, 8.0));
    const auto tb = piecewise_power();
    const GeneralizedInverse a(w_profile(tb));
    const auto r1 = scaling_identity_check(tb, a, {0.25, 1.0, 4.0}, FrequencyGrid(1, 1 << 18, 2048.0));
    const auto r2 = scaling_identity_check(tb, a, {0.25, 1.0, 4.0}, FrequencyGrid(1, 1 << 19, 2048.0));
    o.detail << "stable " << rs.max_linf << ", tabulated " << r1.max_linf << " -> " << r2.max_linf << " (x"
             << r1.max_linf / r2.max_linf << ")";
    o.require(rs.max_linf <= 1e-3, "stable <= 1e-3");
    o.require(r1.max_linf <= 0.01, "tabulated <= 1%");
    o.require(r1.max_linf / r2.max_linf >= 2.0, "tabulated improves >= 2x");
}

// 4. O-RV indices
void c4(Outcome& o) {
    double err = 0.0, inv = 0.0;
    for (double s : {0.5, 1.0, 1.5}) {
        std::vector<ORVIndices> out;
        for (double c : {0.1, 1.0, 10.0}) out.push_back(estimate_indices(power(c, s)));
        for (const auto& i : out) {
            for (double v : {i.p1, i.q1, i.p2, i.q2}) err = std::max(err, std::fabs(v - s));
            inv = std::max({inv, std::fabs(i.p1 - out[0].p1), std::fabs(i.q1 - out[0].q1), std::fabs(i.p2 - out[0].p2),
                            std::fabs(i.q2 - out[0].q2)});
        }
    }
    const auto sp = estimate_indices(w_profile(piecewise_power()));
    const double split = std::max({std::fabs(sp.p1 - 0.5), std::fabs(sp.q1 - 0.5), std::fabs(sp.p2 - 1.5), std::fabs(sp.q2 - 1.5)});
    o.detail << "power-law error " << err << ", c-invariance " << inv << ", split-law error " << split;
    o.require(err <= 0.02, "power law within 0.02");
    o.require(inv <= 1e-12, "c-invariance 1e-12");
    o.require(split <= 0.02, "split law within 0.02");
}

// 5. assumption B
void c5(Outcome& o) {
    const auto R = logspace(1e-3, 1e3, 61);
    double err = 0.0, flat = 0.0;
    for (double sig : {0.5, 1.0, 1.5}) {
        const auto rep = nondegeneracy_B(LevyMeasure::stable(1, sig), R, {1.0});
        err = std::max(err, std::fabs(rep.value - sig / (2.0 - sig)));
        flat = std::max(flat, (rep.max_value - rep.value) / rep.max_value);
    }
    AngularKernel axis;
    axis.dim = 2;
    axis.nodes = {1.0, 0.0, -1.0, 0.0};
    axis.weights = {1.0, 1.0};
    const auto deg = LevyMeasure::radial_angular(2, 1.0, {{0.0, INFINITY, 1.0, -3.0}}, axis, {});
    const double orth = nondegeneracy_B(deg, logspace(1e-3, 1e3, 13), {0.0, 1.0}).value;
    const double along = nondegeneracy_B(deg, logspace(1e-3, 1e3, 13), {1.0, 0.0}).value;
    o.detail << "stable error " << err << ", flatness " << flat << ", degenerate orthogonal " << orth << " (along axis " << along << ")";
    o.require(err <= 1e-3, "value within 1e-3");
    o.require(flat < 1e-8, "flat to 1e-8");
    o.require(std::fabs(orth) <= 1e-12, "degenerate direction ~ 0");
    o.require(along > 0.1, "axis direction nondegenerate");
}

// 6. partition of unity and reconstruction
void c6(Outcome& o) {
    const FrequencyGrid g(1, 1 << 12, 512.0);
    double part = 0.0, rec = 0.0;
    for (int N : {2, 3, 4}) {
        const DyadicSystem sys(N, g);
        for (std::size_t k = 1; k <= 1000; ++k) {
            double s = 0.0;
            for (int j = 0; j < sys.blocks(); ++j) s += sys.block(j)[k];
            part = std::max({part, std::fabs(s - 1.0), std::fabs(DyadicSystem::partition_sum(N, g.frequency_norm(k)) - 1.0)});
        }
        const Lattice lat = g.spatial();
        const auto f = random_band_limited(lat, 64.0, 17, static_cast<std::uint64_t>(N));
        const auto B = lp_blocks(lat, f, sys);
        std::vector<double> sum(f.size(), 0.0);
        for (const auto& b : B)
            for (std::size_t i = 0; i < f.size(); ++i) sum[i] += b[i];
        rec = std::max(rec, max_diff(sum, f));
    }
    o.detail << "partition error " << part << ", reconstruction error " << rec;
    o.require(part <= 1e-12, "partition 1e-12");
    o.require(rec <= 1e-10, "reconstruction 1e-10");
}

// 7. J algebra and norm equivalence
void c7(Outcome& o) {
    const FrequencyGrid g(1, 1 << 12, 64.0);
    const Lattice lat = g.spatial();
    const auto sym = compute_symbol(LevyMeasure::stable(1, 1.5), g);
    const auto f = MarkedField::unmarked(lat, gaussian(lat, 0.5));
    const Profile hw = [](double r) { return 0.5 * r; };
    double alg = 0.0;
    for (double p : {2.0, 4.0})
        for (auto [s, t] : std::vector<std::pair<double, double>>{{0.5, 0.25}, {1.0, -0.5}, {-0.3, 0.8}}) {
            const double lhs = bessel_norm_via_J(apply_J(f, sym, t), sym, NormSpec{s, p, 0.0, 0.0, hw}).value;
            const double rhs = bessel_norm_via_J(f, sym, NormSpec{s + t, p, 0.0, 0.0, hw}).value;
            alg = std::max(alg, std::fabs(lhs - rhs) / std::fabs(rhs));
        }
    alg = std::max(alg, max_diff(apply_J(apply_J(f, sym, 0.7), sym, -0.7).channels[0], f.channels[0]));

    const auto m = LevyMeasure::stable(1, 1.0);
    const NormSpec sp{0.5, 2.0, 0.0, 0.0, w_profile(m)};
    double band = 0.0, drift = 0.0;
    for (int N : {2, 3, 4}) {
        std::vector<double> per;
        for (auto [M, Xi] : std::vector<std::pair<std::size_t, double>>{{1 << 16, 256.0}, {1 << 17, 512.0}}) {
            const FrequencyGrid gg(1, M, Xi);
            std::vector<MarkedField> fam;
            for (int k = -3; k <= 4; ++k) fam.push_back(MarkedField::unmarked(gg.spatial(), gaussian(gg.spatial(), std::pow(2.0, k))));
            per.push_back(norm_equivalence_check(fam, DyadicSystem(N, gg), sp, compute_symbol(m.symmetrized(), gg)).band);
        }
        band = std::max({band, per[0], per[1]});
        drift = std::max(drift, std::fabs(per[1] / per[0] - 1.0));
    }
    o.detail << "J algebra error " << alg << ", equivalence band " << band << ", refinement drift " << drift;
    o.require(alg <= 1e-10, "J identities 1e-10");
    o.require(band <= 10.0, "band <= 10");
    o.require(drift < 0.1, "drift < 10%");
}

// 8. semigroup and solver
void c8(Outcome& o) {
    const FrequencyGrid g(1, 256, 8.0);
    const Lattice lat = g.spatial();
    const auto psi = compute_symbol(LevyMeasure::stable(1, 1.0), g);
    const auto g0 = bump(lat, 1.0, 0.5);
    double semi = 0.0;
    for (double lambda : {0.0, 1.0})
        for (auto [t, r] : {std::pair{0.3, 0.5}, std::pair{1.0, 2.0}})
            semi = std::max(semi, max_diff(semigroup_apply(psi, lambda, t + r, g0),
                                           semigroup_apply(psi, lambda, t, semigroup_apply(psi, lambda, r, g0))));

    const FrequencyGrid gc(1, 64, 4.0);
    const auto psic = compute_symbol(LevyMeasure::stable(1, 1.0), gc);
    const auto tc = uniform_time_grid(2.0, 64);
    double res = 0.0;
    for (double lambda : {0.5, 3.0}) {
        const TimeField f{tc, std::vector<std::vector<double>>(tc.size(), std::vector<double>(gc.size(), 1.7))};
        const auto r = resolvent_apply(psic, lambda, f);
        for (std::size_t k = 0; k < tc.size(); ++k)
            for (double v : r.values[k]) res = std::max(res, std::fabs(v - 1.7 * (1.0 - std::exp(-lambda * tc[k])) / lambda));
    }

    const FrequencyGrid gm(1, 128, 4.0);
    const Lattice lm = gm.spatial();
    const auto psim = compute_symbol(LevyMeasure::stable(1, 1.0), gm);
    std::vector<double> resid;
    for (std::size_t K : {32, 64, 128}) {
        const auto t = uniform_time_grid(1.0, K);
        InputData in;
        in.lattice = lm;
        in.lambda = 1.0;
        in.g = bump(lm, 1.0);
        in.f.times = t;
        for (double tk : t) {
            auto b = bump(lm, 0.8, 0.5);
            for (auto& v : b) v *= std::cos(2.0 * tk);
            in.f.values.push_back(b);
        }
        resid.push_back(residual_check(solve(psim, in, JumpSample{}, t), psim, in, JumpSample{}).max_residual);
    }
    const double h1 = resid[0] / resid[1], h2 = resid[1] / resid[2];
    o.detail << "semigroup law " << semi << ", constant resolvent " << res << ", residual ratios " << h1 << ", " << h2;
    o.require(semi <= 1e-8, "semigroup 1e-8");
    o.require(res <= 1e-8, "resolvent 1e-8");
    o.require(h1 >= 1.8 && h2 >= 1.8, "residual halves");
}

// 9. stochastic layer
void c9(Outcome& o) {
    const auto m = LevyMeasure::stable(1, 1.0);
    const auto z = simulate_terminal_values(m, 1.0, 1e-2, 100000, 11);
    const std::vector<double> xi = {0.02, 0.05, 0.1, 0.5, 1.0, 2.0};
    std::vector<cplx> exact;
    for (double x : xi) exact.push_back(std::exp(-2.0 * M_PI * M_PI * std::fabs(x)));
    double worst = 0.0;
    for (const auto& pt : empirical_characteristic(z, 1, xi, exact))
        worst = std::max({worst, std::fabs(pt.empirical.real() - pt.exact.real()) / pt.se,
                          std::fabs(pt.empirical.imag() - pt.exact.imag()) / pt.se});

    // x-constant Phi = a_z + b_z t against the scalar per-path formula
    const FrequencyGrid g(1, 64, 4.0);
    const auto psi = compute_symbol(m, g);
    const auto t = uniform_time_grid(1.0, 64);
    const std::vector<double> w{2.0, 5.0}, a{1.0, -0.5}, b{0.3, 2.0};
    MarkedTimeField P{t, {}, w};
    for (double tk : t) P.values.push_back({std::vector<double>(g.size(), a[0] + b[0] * tk), std::vector<double>(g.size(), a[1] + b[1] * tk)});
    auto lin = [](double lambda, double a0, double b0, double s) {
        if (lambda == 0.0) return a0 * s + 0.5 * b0 * s * s;
        const double e = std::exp(-lambda * s);
        return (a0 + b0 * s) * (1.0 - e) / lambda - b0 * (1.0 / (lambda * lambda) - e * (s / lambda + 1.0 / (lambda * lambda)));
    };
    double conv = 0.0;
    for (double lambda : {0.0, 0.8})
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
            const auto j = simulate_poisson_measure(MarkIntensity{w}, 1.0, 11, rep);
            const auto r = stochastic_convolution(psi, lambda, P, j);
            for (std::size_t k = 0; k < t.size(); ++k) {
                double ex = 0.0;
                for (std::size_t i = 0; i < j.times.size(); ++i)
                    if (j.times[i] <= t[k]) ex += std::exp(-lambda * (t[k] - j.times[i])) * (a[j.marks[i]] + b[j.marks[i]] * j.times[i]);
                for (std::size_t zz = 0; zz < 2; ++zz) ex -= w[zz] * lin(lambda, a[zz], b[zz], t[k]);
                for (double v : r.values[k]) conv = std::max(conv, std::fabs(v - ex));
            }
        }

    MarkedTimeField K{t, {}, {2.0, 3.0}};
    for (double tk : t) K.values.push_back({bump(g.spatial(), 1.0, tk), bump(g.spatial(), 0.5, -1.0)});
    const auto kr = kunita_check(psi, K, {0.5, 2.0, 8.0}, {0.5, 1.0, 2.0}, 2.0, 40, 21);
    bool finite = kr.rows.size() == 9;
    for (const auto& r : kr.rows) finite &= std::isfinite(r.ratio) && r.ratio > 0.0;

    const auto field = density(compute_symbol(m, FrequencyGrid(1, 1 << 16, 8.0)), 1.0);
    const auto good = empirical_density_check(simulate_terminal_values(m, 1.0, 1e-2, 100000, 51), field);
    const auto bad = empirical_density_check(simulate_terminal_values(LevyMeasure::stable(1, 0.8), 1.0, 1e-2, 100000, 53), field);

    o.detail << "ECF worst " << worst << " SE, convolution error " << conv << ", Kunita C " << kr.C << " spread " << kr.spread
             << ", KS " << good.max_distance << " / mismatch " << bad.max_distance << " (band " << good.band << ")";
    o.require(worst <= 3.0, "ECF within 3 SE");
    o.require(conv <= 1e-8, "convolution 1e-8");
    o.require(finite && kr.spread <= 10.0, "Kunita ratios bounded");
    o.require(good.pass, "CDF check on matching law");
    o.require(!bad.pass, "sigma mismatch flagged");
}

// 10. Hormander conditions
void c10(Outcome& o) {
    const auto m = LevyMeasure::stable(1, 1.0);
    const auto smp = hormander_samples(m, 50, 1e-2, 1e2);
    const auto d = hormander_check(m, smp), s = stochastic_hormander_check(m, smp);
    for (const auto* r : {&d, &s})
        o.detail << (r == &d ? "deterministic" : ", stochastic") << " C " << r->C << " max/median " << r->diagnostic("max_over_median")
                 << " eps drift " << r->diagnostic("eps_drift");
    for (const auto* r : {&d, &s}) {
        o.require(r->pass, r->id + " pass");
        o.require(std::isfinite(r->C), "finite");
        o.require(r->diagnostic("max_over_median") <= 10.0, "max <= 10 median");
        o.require(r->diagnostic("eps_drift") < 0.1, "eps drift < 10%");
    }
}

// 11. a priori harness
void c11(Outcome& o) {
    const auto m = LevyMeasure::stable(1, 1.0);
    const std::vector<EstimateGrid> lv{{FrequencyGrid(1, 512, 16.0), 2, 1.0, 64},
                                       {FrequencyGrid(1, 1024, 32.0), 2, 1.0, 128},
                                       {FrequencyGrid(1, 2048, 64.0), 2, 1.0, 256}};
    APrioriInputs in;
    in.members = 16;
    in.paths = 8;
    for (double p : {2.0, 4.0, 1.5}) {
        const auto r = apriori_refinement_check(m, lv, in, p, 1.0);
        o.detail << "p=" << p << ": L drift " << r.L.drift << " enrich " << r.L.diagnostic("enrichment_drift") << ", u drift "
                 << r.u.drift << " enrich " << r.u.diagnostic("enrichment_drift") << "; ";
        o.require(r.L.pass, "L bound stable at p=" + std::to_string(p));
        o.require(r.u.pass, "u bound stable at p=" + std::to_string(p));
    }
    // g-only runs against the initial-value estimate on the same inputs
    APrioriInputs g = in;
    g.use_f = g.use_phi = false;
    g.paths = 1;
    std::vector<std::vector<double>> fam;
    for (const auto& l : lv)
        for (std::size_t mb = 0; mb < g.members; ++mb) fam.push_back(random_band_limited(l.grid.spatial(), g.xi_max, g.seed, 64 * mb));
    for (double p : {2.0, 4.0}) {
        const auto ga = apriori_refinement_check(m, lv, g, p, 1.0);
        const auto ie = initial_estimate_check(m, lv, fam, 1.0, p);
        const double gap = std::fabs(ga.L.C / ie.C - 1.0);
        o.detail << "g-only p=" << p << " C " << ga.L.C << " vs initial " << ie.C << "; ";
        o.require(ga.L.pass && ie.pass, "g-only and initial stable");
        o.require(gap < 0.05, "g-only C within 5% of initial-value C");
    }
}

// 12. CLI determinism
void c12(Outcome& o, const std::string& cli, const std::string& src, const std::string& work) {
    const fs::path dir = fs::path(work) / "determinism";
    fs::remove_all(dir);
    const std::string cfg = (fs::path(src) / "configs" / "stable1.json").string();
    int rc = 0;
    for (const char* run : {"a", "b"}) {
        const std::string cmd = "\"" + cli + "\" all --config \"" + cfg + "\" --out \"" + (dir / run).string() +
                                "\" --seed 99 --set simulate.paths=4000 --set grid.M=1024 --set grid.extent=16 > /dev/null";
        rc |= std::system(cmd.c_str());
    }
    o.require(rc == 0, "CLI runs exit 0");
    std::size_t compared = 0, differing = 0;
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    };
    if (rc == 0)
        for (const auto& e : fs::directory_iterator(dir / "a")) {
            const auto name = e.path().filename().string();
            if (name.rfind("manifest_", 0) == 0) continue;
            ++compared;
            if (!fs::exists(dir / "b" / name) || slurp(e.path()) != slurp(dir / "b" / name)) ++differing;
        }
    o.detail << compared << " artifacts compared, " << differing << " differ";
    o.require(compared >= 20, "full artifact set");
    o.require(differing == 0, "byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 4) {
        std::fprintf(stderr, "usage: %s <levy-orv> <source dir> <work dir>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1], src = argv[2], work = argv[3];
    fs::create_directories(work);
    struct Criterion {
        int id;
        const char* name;
        double budget;  // seconds
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> all{
        {1, "closed-form density", 2, c1},
        {2, "mass conservation", 5, c2},
        {3, "scaling identity", 30, c3},
        {4, "O-RV indices", 10, c4},
        {5, "nondegeneracy", 10, c5},
        {6, "partition of unity", 5, c6},
        {7, "norm machinery", 60, c7},
        {8, "semigroup and solver", 60, c8},
        {9, "stochastic layer", 600, c9},
        {10, "Hormander conditions", 600, c10},
        {11, "a priori harness", 1200, c11},
        {12, "CLI determinism", 60, [&](Outcome& o) { c12(o, cli, src, work); }},
    };
    bool ok = true;
    for (const auto& c : all) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs <= c.budget, "time budget " + std::to_string(c.budget) + " s");
        std::printf("criterion %2d %-22s %s  %.1fs  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
        std::fflush(stdout);
        ok &= o.pass;
    }
    return ok ? 0 : 1;
}
