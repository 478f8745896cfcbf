#include <cmath>
#include <vector>

#include "doctest.h"
#include "levy/densities.hpp"
#include "levy/error.hpp"
#include "levy/special.hpp"

using namespace levy;

namespace {

LevyMeasure piecewise_power() {
    std::vector<double> r, d;
    for (double x : logspace(1e-8, 1e8, 129)) {
        r.push_back(x);
        d.push_back(x <= 1.0 ? std::pow(x, -0.5) : std::pow(x, -1.5));
    }
    return LevyMeasure::tabulated(1, 0.5, r, d);
}

double cauchy(double t, double x) { return t / (M_PI * M_PI * t * t + x * x); }

}  // namespace

TEST_SUITE("densities") {

TEST_CASE("cauchy density at t = 1") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 1 << 14, 32.0);
    auto p = density(compute_symbol(m, g), 1.0);
    double err = 0.0;
    double x[1];
    for (std::size_t k = 0; k < p.values.size(); ++k) {
        p.lattice.coordinates(k, x);
        if (std::fabs(x[0]) <= 10.0) err = std::max(err, std::fabs(p.values[k] - cauchy(1.0, x[0])));
    }
    CHECK(err <= 1e-4);
    CHECK(p.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.imag_residue <= 1e-12);
    CHECK(p.min_value >= -1e-8);
}

TEST_CASE("unit mass for stable and tabulated measures") {
    FrequencyGrid g(1, 1 << 16, 2048.0);
    auto st = compute_symbol(LevyMeasure::stable(1, 1.0), g);
    auto tb = compute_symbol(piecewise_power(), g);
    for (double t : {0.25, 1.0, 4.0}) {
        CHECK(std::fabs(density(st, t).mass() - 1.0) <= 1e-6);
        auto p = density(tb, t);
        CHECK(std::fabs(p.mass() - 1.0) <= 1e-6);
        CHECK(p.min_value >= -1e-8);
    }
}

TEST_CASE("under-resolved grid names the needed extent") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 64, 0.5);
    try {
        density(compute_symbol(m, g), 0.1);
        FAIL("expected an under-resolution error");
    } catch (const UnderResolvedError& e) {
        // exp(-2 pi^2 Xi t) < 1e-12 needs Xi > 14
        CHECK(e.required_extent() > 10.0);
        CHECK(std::string(e.what()).find("extent") != std::string::npos);
    }
}

TEST_CASE("chapman kolmogorov") {
    FrequencyGrid g(1, 4096, 16.0);
    for (const auto& m : {LevyMeasure::stable(1, 1.0), LevyMeasure::stable(1, 1.5)}) {
        auto s = compute_symbol(m, g);
        auto a = density(s, 0.7), b = density(s, 1.3), c = density(s, 2.0);
        auto ab = convolve(a, b);
        double err = 0.0;
        for (std::size_t k = 0; k < c.values.size(); ++k) err = std::max(err, std::fabs(ab.values[k] - c.values[k]));
        CHECK(err <= 1e-8);
    }
}

TEST_CASE("operator kernels") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 1 << 14, 32.0);
    auto s = compute_symbol(m, g);
    auto p = density(s, 1.0);
    auto id = apply_operator(s, 1.0, identity_multiplier(g));
    CHECK(id.values == p.values);

    auto d1 = apply_operator(s, 1.0, derivative_multiplier(g, {1}));
    double sum = 0.0;
    for (double v : d1.values) sum += v;
    CHECK(std::fabs(sum) <= 1e-8);
    const std::size_t M = g.M();
    for (std::size_t n = 1; n < M / 2; ++n) CHECK(std::fabs(d1.values[M / 2 + n] + d1.values[M / 2 - n]) <= 1e-10);
    CHECK(std::fabs(d1.values[M / 2]) <= 1e-8);

    // L^nu p = d/dt p: compare with the closed form derivative of the cauchy kernel
    auto L = apply_operator(s, 1.0, generator_multiplier(s));
    double x[1], err = 0.0;
    for (std::size_t k = 0; k < L.values.size(); ++k) {
        L.lattice.coordinates(k, x);
        if (std::fabs(x[0]) > 10.0) continue;
        const double t = 1.0, X = x[0];
        const double dt = (M_PI * M_PI * t * t + X * X - 2.0 * M_PI * M_PI * t * t) /
                          std::pow(M_PI * M_PI * t * t + X * X, 2);
        err = std::max(err, std::fabs(L.values[k] - dt));
    }
    CHECK(err <= 1e-4);
}

TEST_CASE("L^nu kernel L1 bound scales like 1/t") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 1 << 15, 32.0);
    auto s = compute_symbol(m, g);
    std::vector<double> C;
    for (double t : {0.5, 1.0, 2.0, 4.0}) C.push_back(t * kernel_statistics(apply_operator(s, t, generator_multiplier(s))).l1);
    const auto [lo, hi] = std::minmax_element(C.begin(), C.end());
    CHECK(*hi / *lo <= 1.2);
}

TEST_CASE("apply_operator is linear in the multiplier") {
    auto m = LevyMeasure::stable(1, 0.8);
    FrequencyGrid g(1, 2048, 16.0);
    auto s = compute_symbol(m, g);
    auto A = generator_multiplier(s);
    auto B = derivative_multiplier(g, {2});
    auto lin = apply_operator(s, 1.0, combine(2.0, A, -0.5, B));
    auto a = apply_operator(s, 1.0, A), b = apply_operator(s, 1.0, B);
    double scale = 0.0, err = 0.0;
    for (std::size_t k = 0; k < lin.values.size(); ++k) {
        scale = std::max(scale, std::fabs(lin.values[k]));
        err = std::max(err, std::fabs(lin.values[k] - (2.0 * a.values[k] - 0.5 * b.values[k])));
    }
    CHECK(err <= 1e-12 * scale);
}

TEST_CASE("fractional power one is the symmetrized generator") {
    AngularKernel k;
    k.dim = 1;
    k.nodes = {1.0, -1.0};
    k.weights = {1.0, 0.3};
    auto m = LevyMeasure::radial_angular(1, 0.6, {{0.0, INFINITY, 1.0, -1.6}}, k, {});
    FrequencyGrid g(1, 2048, 16.0);
    auto s = compute_symbol(m, g);
    auto sym = compute_symbol(m.symmetrized(), g);
    auto a = apply_operator(s, 1.0, generator_multiplier(fractional_symbol(sym, 1.0)));
    auto b = apply_operator(s, 1.0, generator_multiplier(sym));
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        err = std::max(err, std::fabs(a.values[i] - b.values[i]));
        scale = std::max(scale, std::fabs(b.values[i]));
    }
    CHECK(err <= 1e-12 * scale);
}

TEST_CASE("nonsymmetric densities are real and have unit mass") {
    AngularKernel k;
    k.dim = 1;
    k.nodes = {1.0};
    k.weights = {1.0};
    auto m = LevyMeasure::radial_angular(1, 1.5, {{0.0, INFINITY, 1.0, -2.5}}, k, {});
    FrequencyGrid g(1, 4096, 16.0);
    auto p = density(compute_symbol(m, g), 1.0);
    CHECK(p.mass() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(p.imag_residue <= 1e-12);
    // skewed to the right
    double right = 0.0, left = 0.0, x[1];
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        p.lattice.coordinates(i, x);
        if (x[0] > 10.0) right += p.values[i];
        if (x[0] < -10.0) left += p.values[i];
    }
    CHECK(right > 10.0 * left);
}

TEST_CASE("scaling identity for the cauchy process") {
    auto m = LevyMeasure::stable(1, 1.0);
    Profile w = w_profile(m);
    GeneralizedInverse a(w);
    CHECK(a(3.0) == doctest::Approx(6.0).epsilon(1e-12));
    FrequencyGrid g(1, 1 << 14, 8.0);
    auto rep = scaling_identity_check(m, a, {0.25, 1.0, 4.0}, g);
    CHECK(rep.max_linf <= 1e-3);
    // a(t) = 1 compares the lattice with itself
    auto same = scaling_identity_check(m, a, {0.5}, g);
    CHECK(same.rows[0].a == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(same.max_linf <= 1e-10);
    // with the period held fixed and large, what is left is interpolation error
    FrequencyGrid coarse(1, 1 << 16, 3.0), fine(1, 1 << 17, 6.0);
    auto rc = scaling_identity_check(m, a, {1.3}, coarse), rf = scaling_identity_check(m, a, {1.3}, fine);
    CHECK(rc.max_linf / rf.max_linf >= 4.0);
}

TEST_CASE("scaling identity for the fractional kernel") {
    auto m = LevyMeasure::stable(1, 1.0);
    GeneralizedInverse a(w_profile(m));
    // the kernel tail is |x|^{-3/2}, so the period has to be longer
    FrequencyGrid g(1, 1 << 18, 8.0);
    auto rep = scaling_identity_check(m, a, {0.25, 1.0, 4.0}, g, 0.5);
    CHECK(rep.max_linf <= 1e-3);
}

TEST_CASE("scaling identity for the piecewise power measure") {
    auto m = piecewise_power();
    GeneralizedInverse a(w_profile(m));
    FrequencyGrid g1(1, 1 << 18, 2048.0), g2(1, 1 << 19, 2048.0);
    auto r1 = scaling_identity_check(m, a, {0.25, 1.0, 4.0}, g1);
    auto r2 = scaling_identity_check(m, a, {0.25, 1.0, 4.0}, g2);
    CHECK(r1.max_linf <= 0.01);
    CHECK(r1.max_linf / r2.max_linf >= 2.0);
}

TEST_CASE("decay and moment statistics") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 1 << 14, 16.0);
    auto rep = decay_moment_check(m, g, 0.5, {{0}, {1}}, {1e-2, 1.0, 1e2});
    CHECK(std::isfinite(rep.max_sup));
    CHECK(std::isfinite(rep.max_weighted));
    CHECK(rep.R_spread <= 1e-8);
    CHECK(rep.extent_growth < 0.2);
    // derivative vanishes at the origin
    auto s = compute_symbol(m.scaled(1.0), g);
    auto d1 = apply_operator(s, 1.0, derivative_multiplier(g, {1}));
    CHECK(std::fabs(d1.values[g.M() / 2]) <= 1e-8);
    double best = 0.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < d1.values.size(); ++k)
        if (std::fabs(d1.values[k]) > best) {
            best = std::fabs(d1.values[k]);
            arg = k;
        }
    CHECK(arg != g.M() / 2);
    // alpha2 above the order: the weighted integral keeps growing with the extent
    auto div = decay_moment_check(m, g, 1.5, {{0}}, {1.0});
    CHECK(div.extent_growth >= 0.2);
}

TEST_CASE("kernel difference statistics") {
    auto m = LevyMeasure::stable(1, 1.0);
    FrequencyGrid g(1, 1 << 15, 32.0);
    auto s = compute_symbol(m, g);
    auto frac = generator_multiplier(fractional_symbol(s, 0.5));
    auto zero = kernel_difference_statistics(s, frac, 1.0, 0.0, {0.0});
    CHECK(zero.space_diff == 0.0);
    CHECK(zero.time_diff == 0.0);
    // a(t) = 2t
    std::vector<double> C;
    for (double y : {0.05, 0.1, 0.2}) {
        auto d = kernel_difference_statistics(s, frac, 1.0, 0.0, {y});
        C.push_back(d.space_diff / (y / (1.0 * 2.0)));
    }
    const auto [lo, hi] = std::minmax_element(C.begin(), C.end());
    CHECK(*hi / *lo <= 1.25);
    auto td = kernel_difference_statistics(s, frac, 1.0, 0.5, {0.0});
    CHECK(td.time_diff > 0.0);
    CHECK_THROWS_AS(kernel_difference_statistics(s, frac, 1.0, 1.5, {0.0}), PreconditionError);
}

}
