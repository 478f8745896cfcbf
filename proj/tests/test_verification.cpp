#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "levy/error.hpp"
#include "levy/verification.hpp"
#include "json.hpp"

using namespace levy;

namespace {

std::vector<double> cosine(const Lattice& lat, double xi) {
    std::vector<double> f(lat.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::cos(2.0 * M_PI * xi * lat.axis_coordinate(k));
    return f;
}

HormanderOptions quick() {
    HormanderOptions o;
    o.points_per_scale = 4;
    o.period_factor = 32.0;
    o.max_nodes = 1 << 11;
    o.tail_tol = 1e-4;
    return o;
}

}  // namespace

TEST_SUITE("verification") {

TEST_CASE("initial lhs against the single-mode closed form") {
    // T_t cos = e^{(psi - lambda) t} cos for a real symbol, psi(xi) = -2 pi^2 |xi|
    const FrequencyGrid g(1, 1024, 16.0);
    const Lattice lat = g.spatial();
    const auto psi = compute_symbol(LevyMeasure::stable(1, 1.0), g);
    const double P = lat.period(), xi = 3.0 / P;
    const auto f = cosine(lat, xi);
    const double a = 2.0 * M_PI * M_PI * xi;
    for (double p : {2.0, 4.0})
        for (double lambda : {0.0, 1.5}) {
            const double cos_pp = p == 2.0 ? P / 2.0 : 3.0 * P / 8.0;
            const double q = p * (a + lambda), T = 1.0;
            const double exact = std::pow(std::pow(a, p) * cos_pp * (1.0 - std::exp(-q * T)) / q, 1.0 / p);
            CHECK(initial_lhs(psi, f, lambda, T, p) == doctest::Approx(exact).epsilon(1e-9));
        }
    CHECK(initial_lhs(psi, std::vector<double>(lat.size(), 0.0), 0.0, 1.0, 2.0) == 0.0);
    CHECK_THROWS_AS(initial_lhs(psi, std::vector<double>(3, 1.0), 0.0, 1.0, 2.0), PreconditionError);
}

TEST_CASE("initial estimate is stable under refinement and enrichment") {
    const auto m = LevyMeasure::stable(1, 1.0);
    std::vector<EstimateGrid> lv{{FrequencyGrid(1, 1024, 16.0), 2, 1.0, 128}, {FrequencyGrid(1, 2048, 32.0), 2, 1.0, 128}};
    // cosines of growing frequency: the critical index keeps the ratio bounded, s = 0 does not
    std::vector<std::vector<double>> fam;
    for (auto& l : lv)
        for (double xi : {0.5, 1.0, 2.0, 4.0, 8.0}) fam.push_back(cosine(l.grid.spatial(), xi));
    for (double p : {2.0, 4.0}) {
        const auto r = initial_estimate_check(m, lv, fam, 0.0, p);
        CHECK(r.pass);
        CHECK(r.samples.size() == 10);
        CHECK(r.level_C.size() == 2);
        CHECK(r.drift < 1e-6);
        CHECK(r.diagnostic("enrichment_drift") < 0.25);
        const auto neg = initial_estimate_check(m, lv, fam, 0.0, p, 0.0);
        CHECK_FALSE(neg.pass);
        CHECK(neg.diagnostic("enrichment_drift") > 0.25);
    }
    CHECK_THROWS_AS(initial_estimate_check(m, lv, {fam[0]}, 0.0, 2.0), PreconditionError);
}

TEST_CASE("frequency sweep separates the critical index from s = 0") {
    const auto m = LevyMeasure::stable(1, 1.0);
    std::vector<EstimateGrid> lv{{FrequencyGrid(1, 2048, 64.0), 2, 1.0, 64}};
    const auto fam = mixed_family(lv[0].grid.spatial(), 16.0, 12, 1);
    CHECK(sweep_bound(16.0, 0, 12) == doctest::Approx(1.0));
    CHECK(sweep_bound(16.0, 11, 12) == doctest::Approx(16.0));
    const auto pos = initial_estimate_check(m, lv, fam, 0.0, 2.0), neg = initial_estimate_check(m, lv, fam, 0.0, 2.0, 0.0);
    CHECK(pos.pass);
    CHECK_FALSE(neg.pass);

    APrioriInputs g;
    g.members = 12;
    g.paths = 1;
    g.use_f = g.use_phi = false;
    g.frequency_sweep = true;
    g.xi_max = 16.0;
    const auto ap = apriori_refinement_check(m, lv, g, 2.0, 0.0);
    g.g_besov_s = 0.0;
    const auto an = apriori_refinement_check(m, lv, g, 2.0, 0.0);
    CHECK(ap.L.pass);
    CHECK_FALSE(an.L.pass);
}

TEST_CASE("band-limited inputs agree across lattices of one period") {
    const Lattice a = FrequencyGrid(1, 512, 8.0).spatial(), b = FrequencyGrid(1, 1024, 16.0).spatial();
    const auto fa = random_band_limited(a, 2.0, 5, 3), fb = random_band_limited(b, 2.0, 5, 3);
    for (std::size_t k = 0; k < fa.size(); ++k) CHECK(fa[k] == doctest::Approx(fb[2 * k]).epsilon(1e-12));
    const auto fc = random_band_limited(a, 2.0, 5, 4);
    CHECK(fa != fc);
    CHECK_THROWS_AS(random_band_limited(a, 0.0, 5, 3), PreconditionError);
}

TEST_CASE("a priori estimate") {
    const auto m = LevyMeasure::stable(1, 1.0);
    const EstimateGrid lv{FrequencyGrid(1, 256, 16.0), 2, 1.0, 32};
    APrioriInputs in;
    in.members = 4;
    in.paths = 4;

    SUBCASE("no inputs give u = 0") {
        in.use_g = in.use_f = in.use_phi = false;
        const auto r = apriori_estimate_check(m, lv, in, 2.0, 1.0);
        for (const auto& row : r.rows) {
            CHECK(row.Lu == 0.0);
            CHECK(row.u == 0.0);
        }
    }
    SUBCASE("g only reproduces the initial-value ratio") {
        in.use_f = in.use_phi = false;
        const auto r = apriori_estimate_check(m, lv, in, 2.0, 0.0);
        CHECK(r.rows[0].f == 0.0);
        CHECK(r.rows[0].phi_besov == 0.0);
        // the row's Lu is the time-grid version of the quadrature in initial_lhs
        const auto psi = compute_symbol(m, lv.grid);
        const Lattice lat = lv.grid.spatial();
        const auto g = random_band_limited(lat, in.xi_max, in.seed, 0);
        const double ref = initial_lhs(psi, g, 0.0, 1.0, 2.0);
        CHECK(r.rows[0].Lu == doctest::Approx(ref).epsilon(0.05));
    }
    SUBCASE("all inputs, p in {2, 4, 1.5}") {
        for (double p : {2.0, 4.0, 1.5}) {
            const auto r = apriori_estimate_check(m, lv, in, p, 1.0);
            CHECK(std::isfinite(r.L.C));
            CHECK(r.L.C > 0.0);
            CHECK(r.u.C > 0.0);
            CHECK(r.u.diagnostic("rho") == doctest::Approx(1.0));
            for (const auto& row : r.rows) CHECK(row.rhs_L > 0.0);
        }
    }
    SUBCASE("rho for the lambda sweep") {
        const double expect[] = {1.0, 1.0, 0.1};
        int i = 0;
        for (double lambda : {0.1, 1.0, 10.0}) {
            in.use_phi = false;
            const auto r = apriori_estimate_check(m, lv, in, 2.0, lambda);
            CHECK(r.u.diagnostic("rho") == doctest::Approx(expect[i++]).epsilon(1e-15));
            CHECK(std::isfinite(r.u.C));
        }
    }
    SUBCASE("levels are merged") {
        const std::vector<EstimateGrid> two{lv, {FrequencyGrid(1, 512, 32.0), 2, 1.0, 64}};
        const auto r = apriori_refinement_check(m, two, in, 2.0, 1.0);
        CHECK(r.L.level_C.size() == 2);
        CHECK(r.rows.size() == 2 * in.members);
        CHECK(r.L.drift < 0.25);
    }
    SUBCASE("deterministic and reproducible") {
        const auto a = apriori_estimate_check(m, lv, in, 2.0, 1.0), b = apriori_estimate_check(m, lv, in, 2.0, 1.0);
        CHECK(report_json(a.L) == report_json(b.L));
    }
    SUBCASE("rejects bad parameters") {
        CHECK_THROWS_AS(apriori_estimate_check(m, lv, in, 1.0, 1.0), PreconditionError);
        in.marks = 9;
        CHECK_THROWS_AS(apriori_estimate_check(m, lv, in, 2.0, 1.0), PreconditionError);
    }
}

TEST_CASE("fractional representation") {
    const auto m = LevyMeasure::stable(1, 1.0);
    const Lattice lat = FrequencyGrid(1, 1024, 16.0).spatial();
    FractionalOptions fo;
    fo.paths = 1000;
    fo.points = 16;

    SUBCASE("constant f gives zero on both routes") {
        const auto r = fractional_routes(m, 0.5, lat, std::vector<double>(lat.size(), 2.0), fo);
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            CHECK(std::fabs(r.spectral[i]) < 1e-12);
            CHECK(std::fabs(r.mc_raw[i]) < 1e-12);
        }
    }
    SUBCASE("calibrated constant and agreement within 3 SE") {
        const std::vector<std::vector<double>> fam{gaussian(lat, 1.0), random_band_limited(lat, 1.0, 3, 0),
                                                   random_band_limited(lat, 1.0, 3, 1)};
        const auto r = fractional_representation_check(m, 0.5, lat, fam, fo);
        CHECK(r.pass);
        CHECK(r.diagnostic("c_analytic") == doctest::Approx(0.5 / std::tgamma(0.5)).epsilon(1e-12));
        CHECK(r.diagnostic("calibration_vs_analytic") < 0.05);
        CHECK(r.samples.size() == 3);
    }
    SUBCASE("analytic constant") {
        CHECK(fractional_constant(0.5) == doctest::Approx(0.5 / std::sqrt(M_PI)).epsilon(1e-14));
        CHECK(fractional_constant(0.25) == doctest::Approx(0.25 / std::tgamma(0.75)).epsilon(1e-14));
        CHECK_THROWS_AS(fractional_routes(m, 1.0, lat, gaussian(lat, 1.0), fo), PreconditionError);
    }
}

TEST_CASE("hormander integrals") {
    const auto m = LevyMeasure::stable(1, 1.0);
    const auto opt = quick();
    const double C0 = hormander_C0(w_profile(m), {1.0});
    CHECK(C0 >= 4.0);

    SUBCASE("no shift gives zero") {
        CHECK(hormander_integral(m, {0.0, 0.0, 1.0}, 1e-2, C0, opt) == 0.0);
        CHECK(stochastic_hormander_integral(m, {0.0, 0.0, 1.0}, 1e-2, C0, opt) == 0.0);
    }
    SUBCASE("self-similarity of the Cauchy kernel") {
        // t -> c t, x -> c x leaves both integrals invariant when eps scales with them
        const HormanderSample a{0.25, 0.5, 1.0}, b{0.025, 0.05, 0.1};
        const double Ia = hormander_integral(m, a, 1e-2, C0, opt), Ib = hormander_integral(m, b, 1e-3, C0, opt);
        CHECK(Ia > 0.0);
        CHECK(Ib == doctest::Approx(Ia).epsilon(0.02));
        const double Ja = stochastic_hormander_integral(m, a, 1e-2, C0, opt);
        const double Jb = stochastic_hormander_integral(m, b, 1e-3, C0, opt);
        CHECK(Ja > 0.0);
        CHECK(Jb == doctest::Approx(Ja).epsilon(0.02));
    }
    SUBCASE("checks over four decades") {
        // five samples only cover one corner, so keep eps well below w(eta)
        const auto smp = hormander_samples(m, 5, 1.0, 1e4);
        CHECK(smp.size() == 5);
        for (const auto& r : {hormander_check(m, smp, opt), stochastic_hormander_check(m, smp, opt)}) {
            CHECK(r.pass);
            CHECK(r.diagnostic("max_over_median") <= 10.0);
            CHECK(r.diagnostic("eps_drift") < 0.1);
            CHECK(r.level_C.size() == 2);
        }
        std::vector<HormanderSample> bad{{2.0, 0.0, 1.0}};
        CHECK_THROWS_AS(hormander_check(m, bad, opt), PreconditionError);
    }
    SUBCASE("time difference is scale free") {
        const double a = fractional_time_difference(m, 0.5, 1.0, opt), b = fractional_time_difference(m, 0.05, 0.1, opt);
        CHECK(a > 0.0);
        CHECK(b == doctest::Approx(a).epsilon(0.02));
        CHECK(fractional_time_difference(m, 0.0, 1.0, opt) == 0.0);
    }
}

TEST_CASE("report serialization") {
    EstimateReport r;
    r.id = "x";
    r.param_names = {"a", "b"};
    r.samples = {{{1.0, 2.0}, 3.0, 4.0, 0.75}, {{5.0, 6.0}, 1.0, 0.0, INFINITY}};
    r.diagnostics = {{"k", 1.5}};
    const auto j = nlohmann::json::parse(report_json(r));
    CHECK(j["id"] == "x");
    CHECK(j["samples"].size() == 2);
    CHECK(j["samples"][1]["ratio"].is_null());
    CHECK(j["diagnostics"]["k"] == 1.5);
    CHECK(std::isnan(r.diagnostic("missing")));

    const std::string path = "test_verification_report.csv";
    write_report_csv(path, r);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "a,b,lhs,rhs,ratio");
    CHECK(row == "1,2,3,4,0.75");
}

}  // TEST_SUITE
