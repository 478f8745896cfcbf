#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "levy/error.hpp"
#include "levy/orv.hpp"
#include "levy/special.hpp"

using namespace levy;

namespace {

Profile power(double c, double s) {
    return [c, s](double r) { return c * std::pow(r, s); };
}

Profile split_power() {
    return [](double r) { return r <= 1.0 ? std::sqrt(r) : r * std::sqrt(r); };
}

Profile wobble() {
    return [](double r) { return r * (2.0 + std::sin(std::log(r))); };
}

// limsup over a dense sample of log eps for w = r (2 + sin log r):
// x * max_theta (2 + sin(theta + log x)) / (2 + sin theta)
double wobble_ratio(double x) {
    const double L = std::log(x);
    double best = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * i / n;
        best = std::max(best, (2.0 + std::sin(th + L)) / (2.0 + std::sin(th)));
    }
    return x * best;
}

}  // namespace

TEST_SUITE("orv") {

TEST_CASE("ratio functions of exact and split power laws") {
    auto rf = ratio_functions(power(0.5, 1.0), {0.5, 1.0, 2.0});
    CHECK(rf.r1[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rf.r1[2] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rf.r2[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rf.r2[2] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rf.r1[1] == 1.0);
    CHECK(rf.r2[1] == 1.0);
    auto sp = ratio_functions(split_power(), {2.0});
    CHECK(sp.r1[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sp.r2[0] == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-12));
    CHECK(sp.zero.lo == 1e-14);
    CHECK(sp.infinity.hi == 1e14);
}

TEST_CASE("ratio functions reject non O-RV profiles") {
    // vanishes at the origin faster than any power
    Profile bad = [](double r) { return std::exp(-std::pow(std::log(r), 2) / 5.0); };
    CHECK_THROWS_AS(ratio_functions(bad, {2.0}), NumericalError);
}

TEST_CASE("indices of power laws are scale invariant") {
    for (double s : {0.5, 1.0, 1.5}) {
        std::vector<ORVIndices> out;
        for (double c : {0.1, 1.0, 10.0}) out.push_back(estimate_indices(power(c, s)));
        for (const auto& i : out) {
            CHECK(std::fabs(i.p1 - s) <= 0.02);
            CHECK(std::fabs(i.q1 - s) <= 0.02);
            CHECK(std::fabs(i.p2 - s) <= 0.02);
            CHECK(std::fabs(i.q2 - s) <= 0.02);
        }
        for (std::size_t k = 1; k < out.size(); ++k) {
            CHECK(std::fabs(out[k].p1 - out[0].p1) <= 1e-12);
            CHECK(std::fabs(out[k].q1 - out[0].q1) <= 1e-12);
            CHECK(std::fabs(out[k].p2 - out[0].p2) <= 1e-12);
            CHECK(std::fabs(out[k].q2 - out[0].q2) <= 1e-12);
        }
    }
}

TEST_CASE("indices of the split power law") {
    auto i = estimate_indices(split_power());
    CHECK(std::fabs(i.p1 - 0.5) <= 0.02);
    CHECK(std::fabs(i.q1 - 0.5) <= 0.02);
    CHECK(std::fabs(i.p2 - 1.5) <= 0.02);
    CHECK(std::fabs(i.q2 - 1.5) <= 0.02);
}

TEST_CASE("indices of an oscillating profile contain the brute force value") {
    auto i = estimate_indices(wobble());
    // brute-force slopes over the same regression window
    double lo = 1e9, hi = -1e9;
    for (double x : logspace(1e-4, 1e-2, 9)) {
        const double v = std::log(wobble_ratio(x)) / std::log(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(i.p1 <= i.q1);
    CHECK(i.p1 - i.hw_p1 <= lo + 1e-3);
    CHECK(i.q1 + i.hw_q1 >= hi - 1e-3);
    // true index is 1
    CHECK(i.p1 - i.hw_p1 <= 1.0);
    CHECK(i.q1 + i.hw_q1 >= 1.0);
    CHECK(i.p1 >= 0.5);
    CHECK(i.q1 <= 1.5);
}

TEST_CASE("assumption A clauses") {
    CHECK(check_assumption_A({1, 1, 1, 1}, 1.0).pass);
    CHECK(check_assumption_A({0.5, 0.5, 0.5, 0.5}, 0.5).pass);
    auto r = check_assumption_A({0.9, 1.6, 1.2, 1.8}, 1.5);
    CHECK_FALSE(r.pass);
    bool p1_failed = false;
    for (const auto& c : r.clauses)
        if (!c.pass && c.name.find("p1") != std::string::npos) p1_failed = true;
    CHECK(p1_failed);
    CHECK_FALSE(check_assumption_A({0.5, 1.0, 0.5, 0.5}, 0.5).pass);
    CHECK_FALSE(check_assumption_A({0.5, 0.5, 1.0, 1.5}, 1.0).pass);
}

TEST_CASE("assumption A is monotone under interval enlargement") {
    const double sig[] = {0.5, 1.0, 1.5};
    const double base[][4] = {{0.3, 0.6, 0.4, 0.7}, {0.8, 1.2, 0.9, 1.5}, {1.2, 1.6, 1.1, 1.9}, {0.2, 0.9, 0.3, 0.8}};
    for (double s : sig)
        for (const auto& b : base)
            for (double grow : {0.0, 0.05, 0.2, 0.5}) {
                ORVIndices a{b[0], b[1], b[2], b[3]};
                ORVIndices e{b[0] - grow, b[1] + grow, b[2] - grow, b[3] + grow};
                if (!check_assumption_A(a, s).pass) CHECK_FALSE(check_assumption_A(e, s).pass);
            }
}

TEST_CASE("scaling bounds") {
    ORVIndices idx{1, 1, 1, 1};
    auto b = scaling_bounds(idx, power(1.0, 1.0), 1.5, 0.5);
    CHECK(std::isfinite(b.c1));
    CHECK(std::isfinite(b.c2));
    CHECK(b.c1 <= 1.0 + 1e-12);
    CHECK(b.c2 >= 1.0 - 1e-12);
    CHECK(b.pairs >= 10000);
    CHECK(b.bounded);
    CHECK_THROWS_AS(scaling_bounds(idx, power(1.0, 1.0), 0.9, 0.5), PreconditionError);

    // degenerate x = y span
    auto d = scaling_bounds(idx, power(1.0, 1.0), 1.5, 0.5, 3.0, 3.0, 1);
    CHECK(d.c1 == doctest::Approx(1.0));
    CHECK(d.c2 == doctest::Approx(1.0));

    ORVIndices sp{0.5, 0.5, 1.5, 1.5};
    auto s1 = scaling_bounds(sp, split_power(), 1.8, 0.3);
    auto s2 = scaling_bounds(sp, split_power(), 1.8, 0.3, 1e-8, 1e8, 281);
    CHECK(std::isfinite(s1.c1));
    CHECK(std::isfinite(s1.c2));
    CHECK(std::fabs(s2.c1 / s1.c1 - 1.0) < 0.05);
    CHECK(std::fabs(s2.c2 / s1.c2 - 1.0) < 0.05);
}

TEST_CASE("generalized inverse") {
    auto a = generalized_inverse(power(0.5, 1.0));
    for (double t : {1e-6, 0.3, 1.0, 7.0, 1e5}) CHECK(a(t) == doctest::Approx(2.0 * t).epsilon(1e-8));
    for (double c : {0.1, 3.0})
        for (double s : {0.5, 1.5}) {
            auto w = power(c, s);
            auto ai = generalized_inverse(w);
            for (double t : {1e-3, 1.0, 50.0}) CHECK(ai(t) == doctest::Approx(std::pow(t / c, 1.0 / s)).epsilon(1e-8));
            CHECK(ai(w(1.0)) == doctest::Approx(1.0).epsilon(1e-8));
            Profile ap = [&ai](double t) { return ai(t); };
            IndexOptions opt;
            opt.zero = {1e-10, 1e-6, 50};
            opt.infinity = {1e6, 1e10, 50};
            auto ia = estimate_indices(ap, opt);
            CHECK(std::fabs(ia.p1 - 1.0 / s) <= 0.02);
            CHECK(std::fabs(ia.q2 - 1.0 / s) <= 0.02);
        }
}

TEST_CASE("generalized inverse index bounds for the split power law") {
    auto w = split_power();
    auto idx = estimate_indices(w);
    auto a = generalized_inverse(w);
    Profile ap = [&a](double t) { return a(t); };
    IndexOptions opt;
    opt.zero = {1e-10, 1e-6, 50};
    opt.infinity = {1e6, 1e10, 50};
    auto ia = estimate_indices(ap, opt);
    CHECK(ia.p1 >= 1.0 / idx.q1 - 0.05);
    CHECK(ia.q1 <= 1.0 / idx.p1 + 0.05);
    CHECK(ia.p2 >= 1.0 / idx.q2 - 0.05);
    CHECK(ia.q2 <= 1.0 / idx.p2 + 0.05);
}

TEST_CASE("generalized inverse on plateaus and nonmonotone input") {
    Profile step = [](double r) { return r < 1.0 ? r : (r < 2.0 ? 1.0 : r - 1.0); };
    auto a = generalized_inverse(step);
    CHECK(!a.plateaus().empty());
    // a(w(t)-) <= t <= a(w(t)+) at the plateau
    CHECK(a(1.0) <= 1.0 + 1e-8);
    CHECK(a(1.0 + 1e-9) >= 2.0 - 1e-6);
    Profile bumpy = [](double r) { return r * (1.5 + std::sin(10.0 * std::log(r))); };
    CHECK_THROWS(generalized_inverse(bumpy));
}

TEST_CASE("karamata integrals against closed forms") {
    ORVIndices idx{1, 1, 1, 1};
    auto r = verify_karamata_integrals(power(1.0, 1.0), idx, {{KaramataLemma::ZeroA, 1.0, 0.5}});
    REQUIRE(r.size() == 1);
    CHECK(r[0].sup_ratio == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(r[0].drift < 0.02);
    CHECK(r[0].limit_ok);
    CHECK(r[0].pass);
    // boundary tau = -beta p1
    CHECK_THROWS_AS(verify_karamata_integrals(power(1.0, 1.0), idx, {{KaramataLemma::ZeroA, 1.0, -1.0}}),
                    PreconditionError);
    try {
        verify_karamata_integrals(power(1.0, 1.0), idx, {{KaramataLemma::InfA, 1.0, -0.5}});
        FAIL("expected rejection");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("q2") != std::string::npos);
    }
}

TEST_CASE("karamata integrals for the inverse and across all lemmas") {
    ORVIndices idx{1, 1, 1, 1};
    auto w = power(1.0, 1.0);
    auto inv = verify_karamata_integrals(w, idx, {{KaramataLemma::InverseLower, 1.0, 0.5}});
    CHECK(std::isfinite(inv[0].sup_ratio));
    CHECK(inv[0].drift < 0.02);
    CHECK(inv[0].pass);

    auto sp = split_power();
    ORVIndices si{0.5, 0.5, 1.5, 1.5};
    std::vector<KaramataCase> cases = {
        {KaramataLemma::ZeroA, 1.0, 0.0},   {KaramataLemma::ZeroB, 1.0, -1.0},
        {KaramataLemma::ZeroC, -1.0, 1.0},  {KaramataLemma::ZeroD, -1.0, 0.2},
        {KaramataLemma::InfA, 1.0, -2.0},   {KaramataLemma::InfB, 1.0, -1.0},
        {KaramataLemma::InfC, -1.0, 1.0},   {KaramataLemma::InfD, -1.0, 2.0},
        {KaramataLemma::InverseLower, 1.0, 0.3}, {KaramataLemma::InverseUpper, 1.0, 3.0},
    };
    auto res = verify_karamata_integrals(sp, si, cases);
    for (const auto& x : res) {
        CAPTURE(karamata_name(x.c.lemma));
        CHECK(x.pass);
    }
}

TEST_CASE("karamata ratios are invariant under w -> c w") {
    ORVIndices si{0.5, 0.5, 1.5, 1.5};
    std::vector<KaramataCase> cases = {{KaramataLemma::ZeroA, 1.0, 0.0}, {KaramataLemma::InfC, -1.0, 1.0}};
    auto sp = split_power();
    Profile sp3 = [&sp](double r) { return 3.0 * sp(r); };
    auto a = verify_karamata_integrals(sp, si, cases);
    auto b = verify_karamata_integrals(sp3, si, cases);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::fabs(a[i].sup_ratio / b[i].sup_ratio - 1.0) <= 1e-12);
}

}
