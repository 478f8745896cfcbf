#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "levy/error.hpp"
#include "levy/lattice.hpp"
#include "levy/measures.hpp"
#include "levy/orv.hpp"
#include "levy/special.hpp"
#include "levy/symbols.hpp"

using namespace levy;

namespace {

LevyMeasure one_sided(double sigma) {
    AngularKernel k;
    k.dim = 1;
    k.nodes = {1.0};
    k.weights = {1.0};
    return LevyMeasure::radial_angular(1, sigma, {{0.0, INFINITY, 1.0, -1.0 - sigma}}, k, {});
}

// \int_0^inf (e^{iuy} - 1 - iuy 1{sigma > 1}) y^{-1-sigma} dy = Gamma(-sigma) (-iu)^sigma
cplx one_sided_oracle(double sigma, double xi) {
    const double u = 2.0 * M_PI * xi;
    return std::tgamma(-sigma) * std::pow(cplx(0.0, -u), sigma);
}

LevyMeasure piecewise_power() {
    std::vector<double> r, d;
    for (double x : logspace(1e-8, 1e8, 129)) {
        r.push_back(x);
        d.push_back(x <= 1.0 ? std::pow(x, -0.5) : std::pow(x, -1.5));
    }
    return LevyMeasure::tabulated(1, 0.5, r, d);
}

}  // namespace

TEST_SUITE("symbols") {

TEST_CASE("cauchy symbol") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 64, 8.0);
    auto s = compute_symbol(m, g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double xi = g.axis_frequency(k);
        CHECK(s.values[k].real() == doctest::Approx(-2.0 * M_PI * M_PI * std::fabs(xi)).epsilon(1e-12));
        CHECK(s.values[k].imag() == 0.0);
    }
    CHECK(s.values[0] == cplx(0.0, 0.0));
}

TEST_CASE("quadrature route agrees with the closed form") {
    // tabulated delta = 2 r^{-sigma}/sigma is the stable measure
    for (double sig : {0.5, 1.0, 1.5}) {
        std::vector<double> r, d;
        for (double x : logspace(1e-6, 1e6, 25)) {
            r.push_back(x);
            d.push_back(2.0 * std::pow(x, -sig) / sig);
        }
        auto tab = LevyMeasure::tabulated(1, sig, r, d);
        SymbolEvaluator ev(tab), cf(LevyMeasure::stable(1, sig));
        for (double xi : {1e-3, 0.1, 0.7, 3.0, 40.0, 500.0}) {
            CAPTURE(sig);
            CAPTURE(xi);
            CHECK(ev(&xi).real() == doctest::Approx(cf(&xi).real()).epsilon(1e-10));
            CHECK(std::fabs(ev(&xi).imag()) <= 1e-12 * std::fabs(cf(&xi).real()));
        }
    }
}

TEST_CASE("one-sided measures match the gamma oracle") {
    for (double sig : {0.3, 0.5, 0.8, 1.3, 1.5, 1.8}) {
        auto m = one_sided(sig);
        m.validate();
        SymbolEvaluator ev(m);
        for (double xi : {-2.0, -0.3, 0.05, 0.5, 1.0, 7.0}) {
            CAPTURE(sig);
            CAPTURE(xi);
            const cplx want = one_sided_oracle(sig, xi);
            const cplx got = ev(&xi);
            CHECK(std::abs(got - want) <= 1e-10 * std::abs(want));
        }
    }
}

TEST_CASE("hermitian symmetry, sign and origin") {
    auto m = one_sided(0.7);
    FrequencyGrid g(1, 32, 4.0);
    auto s = compute_symbol(m, g);
    CHECK(s.values[0] == cplx(0.0, 0.0));
    for (std::size_t k = 1; k < g.size(); ++k) {
        if (g.on_nyquist_shell(k)) continue;
        const auto mk = g.mirror(k);
        CHECK(std::abs(s.values[mk] - std::conj(s.values[k])) <= 1e-12 * std::abs(s.values[k]));
        CHECK(s.values[k].real() <= 0.0);
    }
    CHECK(std::fabs(s.values[3].imag()) > 0.0);
    auto sym = compute_symbol(m.symmetrized(), g);
    for (const auto& v : sym.values) CHECK(v.imag() == 0.0);
}

TEST_CASE("symbols of isotropic stable measures are rotation invariant in two dimensions") {
    SymbolEvaluator ev(LevyMeasure::stable(2, 1.3));
    const double r = 1.7;
    const double ref[2] = {r, 0.0};
    const cplx base = ev(ref);
    for (double th : {0.1, 0.7, 1.3, 2.9}) {
        const double xi[2] = {r * std::cos(th), r * std::sin(th)};
        CHECK(std::abs(ev(xi) - base) <= 1e-8 * std::abs(base));
    }
    // the sphere quadrature route stays close to the closed form
    auto ra = LevyMeasure::radial_angular(2, 1.3, {{0.0, INFINITY, 1.0, -3.3}}, sphere_surface(2), {});
    SymbolEvaluator q(ra);
    CHECK(q(ref).real() == doctest::Approx(base.real()).epsilon(1e-3));
}

TEST_CASE("truncated symbol") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 128, 32.0);
    auto t1 = truncated_symbol(m.scaled(1.0), g);
    CHECK(t1.values[0] == cplx(0.0, 0.0));
    for (const auto& v : t1.values) CHECK(v.real() <= 0.0);
    for (double R : {1e-2, 1e2}) {
        auto tr = truncated_symbol(m.scaled(R), g);
        for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(tr.values[k] - t1.values[k]) <= 1e-13 * (1 + std::abs(t1.values[k])));
    }
    auto fit = fit_truncated_decay(m.scaled(1.0), 0.9);
    CHECK(fit.c_ref > 0.0);
    CHECK(fit.c_fit > 0.0);
    CHECK(fit.kappa >= 0.9 - 0.1);
    // direct quadrature oracle: 2 w(1) \int_0^1 (cos(2 pi xi y) - 1) y^{-2} dy
    const double xi = 3.0;
    auto direct = integrate_panels([&](double y) { return y > 0 ? (std::cos(2 * M_PI * xi * y) - 1) / (y * y) : -2 * M_PI * M_PI * xi * xi; },
                                   0.0, 1.0, 200, 10);
    SymbolEvaluator cut(m.scaled(1.0), 1.0);
    // nu~_1 = (1/2) y^{-2} per side
    CHECK(cut(&xi).real() == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("fractional symbol") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 64, 8.0);
    auto s = compute_symbol(m, g);
    auto id = fractional_symbol(s, 1.0);
    CHECK(id.values == s.values);
    auto h = fractional_symbol(s, 0.5);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double xi = std::fabs(g.axis_frequency(k));
        CHECK(h.values[k].real() == doctest::Approx(-std::sqrt(2.0 * M_PI * M_PI * xi)).epsilon(1e-12));
    }
    auto ab = fractional_symbol(fractional_symbol(s, 0.5), 0.6);
    auto c = fractional_symbol(s, 0.3);
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(std::abs(ab.values[k] - c.values[k]) <= 1e-12 * (1.0 + std::abs(c.values[k])));
    auto bad = compute_symbol(one_sided(0.5), g);
    CHECK_THROWS_AS(fractional_symbol(bad, 0.5), PreconditionError);
}

TEST_CASE("bessel symbol") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 64, 8.0);
    auto s = compute_symbol(m, g);
    auto j0 = bessel_symbol(s, 0.0);
    for (const auto& v : j0.values) CHECK(v == cplx(1.0, 0.0));
    SymbolField three = s;
    three.values.assign(1, cplx(-3.0, 0.0));
    CHECK(bessel_symbol(three, 1.0).values[0].real() == doctest::Approx(4.0));
    for (double o : {0.5, 1.7}) {
        auto a = bessel_symbol(s, o), b = bessel_symbol(s, -o);
        for (std::size_t k = 0; k < g.size(); ++k) {
            CHECK(a.values[k].real() >= 1.0);
            CHECK(std::fabs((a.values[k] * b.values[k]).real() - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("nondegeneracy of one-dimensional stable measures") {
    const auto R = logspace(1e-3, 1e3, 13);
    const std::vector<double> dir = {1.0};
    for (double sig : {0.5, 1.0, 1.5}) {
        auto rep = nondegeneracy_B(LevyMeasure::stable(1, sig), R, dir);
        CHECK(rep.value == doctest::Approx(sig / (2.0 - sig)).epsilon(1e-12));
        CHECK((rep.max_value - rep.value) / rep.value < 1e-8);
        CHECK(rep.route2_value > 0.0);
        CHECK(rep.route2_value <= rep.value * (1.0 + 1e-9));
    }
}

TEST_CASE("nondegeneracy in two dimensions") {
    AngularKernel axis;
    axis.dim = 2;
    axis.nodes = {1.0, 0.0, -1.0, 0.0};
    axis.weights = {1.0, 1.0};
    auto deg = LevyMeasure::radial_angular(2, 1.0, {{0.0, INFINITY, 1.0, -3.0}}, axis, {});
    const auto R = logspace(1e-3, 1e3, 7);
    auto rep = nondegeneracy_B(deg, R, {0.0, 1.0});
    CHECK(std::fabs(rep.value) <= 1e-14);
    auto rep2 = nondegeneracy_B(deg, R, {1.0, 0.0});
    CHECK(rep2.value > 0.5);

    auto iso = LevyMeasure::stable(2, 1.0);
    auto dirs = unit_directions(2, 16);
    auto r3 = nondegeneracy_B(iso, R, dirs);
    CHECK(r3.value > 0.0);
    CHECK((r3.max_value - r3.value) / r3.value <= 1e-6);
}

TEST_CASE("two-sided symbol bounds") {
    auto m = LevyMeasure::stable(1, 1.0);
    auto b = symbol_two_sided_bounds(m, w_profile(m), logspace(1e-4, 1e4, 33));
    for (double v : b.ratio) CHECK(v == doctest::Approx(M_PI * M_PI).epsilon(1e-12));
    CHECK(b.c2 > 0.0);

    auto pw = piecewise_power();
    auto pb = symbol_two_sided_bounds(pw, w_profile(pw), logspace(1e-2, 1e2, 41));
    CHECK(pb.c2 > 0.0);
    // the ratio interpolates between the pure power regimes sigma (2 pi)^sigma \int(1 - cos v) v^{-1-sigma} dv
    const double inner = 0.5 * std::pow(2 * M_PI, 0.5) * cosine_total(0.5);
    const double outer = 1.5 * std::pow(2 * M_PI, 1.5) * cosine_total(1.5);
    CHECK(pb.c2 >= 0.9 * inner);
    CHECK(pb.C1 <= 1.1 * outer);
    CHECK(pb.ratio.back() == doctest::Approx(inner).epsilon(0.2));
    CHECK(pb.ratio.front() == doctest::Approx(outer).epsilon(0.2));
    // same band on a refined sweep
    auto pf = symbol_two_sided_bounds(pw, w_profile(pw), logspace(1e-2, 1e2, 161));
    CHECK(pf.C1 / pf.c2 == doctest::Approx(pb.C1 / pb.c2).epsilon(0.02));
}

}
