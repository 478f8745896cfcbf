#include "levy/orv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "levy/error.hpp"
#include "levy/special.hpp"

namespace levy {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<double> eps_sequence(const EpsWindow& w) {
    const double decades = std::log10(w.hi / w.lo);
    const int n = std::max(2, static_cast<int>(std::lround(decades * w.per_decade)) + 1);
    return logspace(w.lo, w.hi, static_cast<std::size_t>(n));
}

struct Fit {
    double slope, half_width, residual;
};

// slope of log r against log x through the origin (log r(1) = 0)
Fit fit_index(const std::vector<double>& x, const std::vector<double>& r) {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), lr = std::log(r[i]);
        sxy += lx * lr;
        sxx += lx * lx;
    }
    Fit f{sxy / sxx, 0.0, 0.0};
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), lr = std::log(r[i]);
        f.half_width = std::max(f.half_width, std::fabs(lr / lx - f.slope));
        ss += (lr - f.slope * lx) * (lr - f.slope * lx);
    }
    f.residual = std::sqrt(ss / static_cast<double>(x.size()));
    return f;
}

}  // namespace

Profile w_profile(const LevyMeasure& m) {
    return [m](double r) { return m.w(r); };
}

Profile interpolated_profile(const TailProfile& t) {
    if (t.grid.size() < 2) throw PreconditionError("profile needs at least two grid points");
    return [t](double r) {
        if (r < t.grid.front() || r > t.grid.back())
            throw PreconditionError("profile evaluated outside its grid at r = " + format_double(r));
        auto it = std::upper_bound(t.grid.begin(), t.grid.end(), r);
        std::size_t m = static_cast<std::size_t>(it - t.grid.begin());
        if (m == t.grid.size()) return t.w.back();
        --m;
        const double s = std::log(r / t.grid[m]) / std::log(t.grid[m + 1] / t.grid[m]);
        return t.w[m] * std::pow(t.w[m + 1] / t.w[m], s);
    };
}

RatioFunctions ratio_functions(const Profile& w, const std::vector<double>& x, EpsWindow zero, EpsWindow infinity) {
    RatioFunctions out;
    out.x = x;
    out.zero = zero;
    out.infinity = infinity;
    const auto e0 = eps_sequence(zero), e1 = eps_sequence(infinity);
    std::vector<double> w0(e0.size()), w1(e1.size());
    for (std::size_t k = 0; k < e0.size(); ++k) w0[k] = w(e0[k]);
    for (std::size_t k = 0; k < e1.size(); ++k) w1[k] = w(e1[k]);

    auto sweep = [&](const std::vector<double>& eps, const std::vector<double>& weps, double xv, bool toward_zero,
                     int per_decade, std::vector<double>& trend) {
        double best = 0.0;
        const std::size_t n = eps.size();
        trend.clear();
        double block = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            // order toward the limit point
            const std::size_t k = toward_zero ? n - 1 - i : i;
            const double v = w(eps[k] * xv) / weps[k];
            if (!(v > 0.0) || !std::isfinite(v))
                throw NumericalError("w ratio is not finite at eps = " + format_double(eps[k]) + ", x = " + format_double(xv));
            best = std::max(best, v);
            block = std::max(block, v);
            if (++count == per_decade || i + 1 == n) {
                trend.push_back(block);
                block = 0.0;
                count = 0;
            }
        }
        if (trend.size() >= 3) {
            bool increasing = true;
            for (std::size_t i = 1; i < trend.size(); ++i) increasing &= trend[i] > trend[i - 1] * (1.0 + 1e-9);
            if (increasing && trend.back() > 2.0 * trend.front())
                throw NumericalError("ratio w(eps x)/w(eps) keeps growing along the eps sequence at x = " +
                                     format_double(xv) + " (" + format_double(trend.front()) + " -> " +
                                     format_double(trend.back()) + "); w does not look O-regularly varying");
        }
        return best;
    };

    out.trend1.resize(x.size());
    out.trend2.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.r1.push_back(sweep(e0, w0, x[i], true, zero.per_decade, out.trend1[i]));
        out.r2.push_back(sweep(e1, w1, x[i], false, infinity.per_decade, out.trend2[i]));
    }
    return out;
}

ORVIndices estimate_indices(const Profile& w, const IndexOptions& opt) {
    const int n = static_cast<int>(std::lround(std::log10(opt.x_hi / opt.x_lo) * opt.per_decade)) + 1;
    const auto x = logspace(opt.x_lo, opt.x_hi, static_cast<std::size_t>(n));
    const auto rf = ratio_functions(w, x, opt.zero, opt.infinity);
    std::vector<double> xs, r1s, r2s, xl, r1l, r2l;
    const double small_edge = opt.x_lo * std::pow(10.0, opt.window_decades);
    const double large_edge = opt.x_hi * std::pow(10.0, -opt.window_decades);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= small_edge * (1 + 1e-12)) {
            xs.push_back(x[i]);
            r1s.push_back(rf.r1[i]);
            r2s.push_back(rf.r2[i]);
        }
        if (x[i] >= large_edge * (1 - 1e-12)) {
            xl.push_back(x[i]);
            r1l.push_back(rf.r1[i]);
            r2l.push_back(rf.r2[i]);
        }
    }
    const Fit p1 = fit_index(xs, r1s), q1 = fit_index(xl, r1l), p2 = fit_index(xs, r2s), q2 = fit_index(xl, r2l);
    for (const Fit* f : {&p1, &q1, &p2, &q2})
        if (f->residual > opt.residual_threshold)
            throw NumericalError("index regression residual " + format_double(f->residual) +
                                 " exceeds the threshold; w is not O-RV-like");
    ORVIndices idx;
    idx.p1 = p1.slope;
    idx.q1 = q1.slope;
    idx.p2 = p2.slope;
    idx.q2 = q2.slope;
    idx.hw_p1 = p1.half_width;
    idx.hw_q1 = q1.half_width;
    idx.hw_p2 = p2.half_width;
    idx.hw_q2 = q2.half_width;
    return idx;
}

AssumptionAReport check_assumption_A(const ORVIndices& idx, double sigma, double tol) {
    AssumptionAReport rep;
    auto add = [&](const std::string& name, double value, double bound, bool upper, bool strict) {
        // margin > 0 means satisfied
        const double margin = upper ? bound - value : value - bound;
        const bool ok = strict ? margin + tol > 0.0 : margin + tol >= 0.0;
        rep.clauses.push_back({name, value, bound, margin, ok});
        rep.pass &= ok;
    };
    const double p[2] = {idx.p1, idx.p2}, q[2] = {idx.q1, idx.q2};
    for (int i = 0; i < 2; ++i) {
        const std::string si = std::to_string(i + 1);
        if (sigma < 1.0) {
            add("p" + si + " > 0", p[i], 0.0, false, true);
            add("p" + si + " <= q" + si, p[i], q[i], true, false);
            add("q" + si + " < 1", q[i], 1.0, true, true);
        } else if (sigma == 1.0) {
            add("p" + si + " > 0", p[i], 0.0, false, true);
            add("p" + si + " <= 1", p[i], 1.0, true, false);
            add("q" + si + " >= 1", q[i], 1.0, false, false);
            add("q" + si + " < 2", q[i], 2.0, true, true);
        } else {
            add("p" + si + " > 1", p[i], 1.0, false, true);
            add("p" + si + " <= q" + si, p[i], q[i], true, false);
            add("q" + si + " < 2", q[i], 2.0, true, true);
        }
    }
    rep.sigma_bracketed = idx.p1 - tol <= sigma && sigma <= idx.q1 + tol;
    return rep;
}

ScalingBounds scaling_bounds(const ORVIndices& idx, const Profile& w, double alpha1, double alpha2, double x_lo,
                             double x_hi, int points) {
    if (!(alpha1 > idx.upper())) throw PreconditionError("alpha1 must exceed q1 v q2 = " + format_double(idx.upper()));
    if (!(alpha2 < idx.lower())) throw PreconditionError("alpha2 must be below p1 ^ p2 = " + format_double(idx.lower()));
    if (!(alpha2 > 0.0)) throw PreconditionError("alpha2 must be positive");
    const auto x = logspace(x_lo, x_hi, static_cast<std::size_t>(points));
    std::vector<double> wx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) wx[i] = w(x[i]);
    ScalingBounds b;
    b.c1 = inf;
    b.c1_inner = inf;
    const double lo_in = std::sqrt(x_lo * std::sqrt(x_lo * x_hi)), hi_in = std::sqrt(x_hi * std::sqrt(x_lo * x_hi));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i; j < x.size(); ++j) {
            const double ratio = wx[j] / wx[i], q = x[j] / x[i];
            const double lower = ratio / std::pow(q, alpha2), upper = ratio / std::pow(q, alpha1);
            b.c1 = std::min(b.c1, lower);
            b.c2 = std::max(b.c2, upper);
            if (x[i] >= lo_in && x[j] <= hi_in) {
                b.c1_inner = std::min(b.c1_inner, lower);
                b.c2_inner = std::max(b.c2_inner, upper);
            }
            ++b.pairs;
        }
    }
    // constants that keep moving as the span widens indicate unbounded growth
    b.bounded = std::isfinite(b.c2) && b.c1 > 0.0 && b.c2 <= 1.5 * b.c2_inner && b.c1 >= b.c1_inner / 1.5;
    return b;
}

GeneralizedInverse::GeneralizedInverse(Profile w, double scan_lo, double scan_hi) : w_(std::move(w)) {
    const auto grid = logspace(scan_lo, scan_hi, 481);
    double prev = w_(grid[0]);
    double flat_start = -1.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = w_(grid[i]);
        if (v < prev * (1.0 - 1e-12)) throw PreconditionError("w is not monotone near r = " + format_double(grid[i]));
        if (v <= prev) {
            if (flat_start < 0.0) flat_start = grid[i - 1];
        } else if (flat_start > 0.0) {
            plateaus_.emplace_back(flat_start, grid[i - 1]);
            flat_start = -1.0;
        }
        prev = v;
    }
    if (flat_start > 0.0) plateaus_.emplace_back(flat_start, grid.back());
}

double GeneralizedInverse::operator()(double t) const {
    if (!(t > 0.0)) throw PreconditionError("generalized inverse needs t > 0");
    double lo = 1.0, hi = 1.0;
    if (w_(1.0) >= t) {
        while (w_(lo) >= t) {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-300) return 0.0;
        }
    } else {
        while (w_(hi) < t) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e300) throw NumericalError("w never reaches " + format_double(t));
        }
    }
    // w(lo) < t <= w(hi)
    for (int it = 0; it < 200 && hi > lo * (1.0 + 4e-16); ++it) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        if (w_(mid) >= t) hi = mid;
        else lo = mid;
    }
    return hi;
}

GeneralizedInverse generalized_inverse(const Profile& w) { return GeneralizedInverse(w); }

const char* karamata_name(KaramataLemma k) {
    switch (k) {
        case KaramataLemma::ZeroA: return "zero_a";
        case KaramataLemma::ZeroB: return "zero_b";
        case KaramataLemma::ZeroC: return "zero_c";
        case KaramataLemma::ZeroD: return "zero_d";
        case KaramataLemma::InfA: return "infinity_a";
        case KaramataLemma::InfB: return "infinity_b";
        case KaramataLemma::InfC: return "infinity_c";
        case KaramataLemma::InfD: return "infinity_d";
        case KaramataLemma::InverseLower: return "inverse_lower";
        case KaramataLemma::InverseUpper: return "inverse_upper";
    }
    return "?";
}

namespace {

enum class Range { FromZero, ToOne, ToInfinity, FromOne };

struct CaseSetup {
    Range range;
    double x_lo, x_hi;
    bool limit_zero;      // limit of the RHS at the limit point is 0 (else infinity)
    bool limit_at_small;  // limit point is x -> 0 (else x -> infinity)
    double power;         // integrand t^power g(t)^beta dt/t
    bool use_inverse;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError("inadmissible Karamata case: requires " + what);
}

CaseSetup setup_case(const KaramataCase& c, const ORVIndices& idx) {
    const double b = c.beta, t = c.tau;
    require(b != 0.0, "beta != 0");
    switch (c.lemma) {
        case KaramataLemma::ZeroA:
            require(b > 0.0 && t > -b * idx.p1, "beta > 0 and tau > -beta p1");
            return {Range::FromZero, 1e-6, 1.0, true, true, t, false};
        case KaramataLemma::ZeroB:
            require(b > 0.0 && t < -b * idx.q1, "beta > 0 and tau < -beta q1");
            return {Range::ToOne, 1e-6, 1.0, false, true, t, false};
        case KaramataLemma::ZeroC:
            require(b < 0.0 && t > -b * idx.q1, "beta < 0 and tau > -beta q1");
            return {Range::FromZero, 1e-6, 1.0, true, true, t, false};
        case KaramataLemma::ZeroD:
            require(b < 0.0 && t < -b * idx.p1, "beta < 0 and tau < -beta p1");
            return {Range::ToOne, 1e-6, 1.0, false, true, t, false};
        case KaramataLemma::InfA:
            require(b > 0.0 && -t > b * idx.q2, "beta > 0 and -tau > beta q2");
            return {Range::ToInfinity, 1.0, 1e6, true, false, t, false};
        case KaramataLemma::InfB:
            require(b > 0.0 && -t < b * idx.p2, "beta > 0 and -tau < beta p2");
            return {Range::FromOne, 1.0, 1e6, false, false, t, false};
        case KaramataLemma::InfC:
            require(b < 0.0 && t < -b * idx.p2, "beta < 0 and tau < -beta p2");
            return {Range::ToInfinity, 1.0, 1e6, true, false, t, false};
        case KaramataLemma::InfD:
            require(b < 0.0 && t > -b * idx.q2, "beta < 0 and tau > -beta q2");
            return {Range::FromOne, 1.0, 1e6, false, false, t, false};
        case KaramataLemma::InverseLower:
            if (b > 0.0) {
                require(t < std::min(b / idx.q1, b / idx.q2), "tau < beta/q1 ^ beta/q2");
                return {Range::FromZero, 1e-6, 1e6, true, true, -t, true};
            }
            require(t > std::max(-b / idx.p1, -b / idx.p2), "tau > (-beta/p1) v (-beta/p2)");
            return {Range::FromZero, 1e-6, 1e6, true, true, t, true};
        case KaramataLemma::InverseUpper:
            if (b > 0.0) {
                require(t > std::max(b / idx.p1, b / idx.p2), "tau > gamma/p1 v gamma/p2");
                return {Range::ToInfinity, 1e-6, 1e6, true, false, -t, true};
            }
            require(t < std::min(-b / idx.q1, -b / idx.q2), "tau < (-gamma/q1) ^ (-gamma/q2)");
            return {Range::ToInfinity, 1e-6, 1e6, true, false, t, true};
    }
    throw PreconditionError("unknown Karamata case");
}

double sup_ratio(const Profile& g, const CaseSetup& s, double beta, int per_decade, double panels_per_unit,
                 std::vector<double>* rhs_out) {
    const int n = static_cast<int>(std::lround(std::log10(s.x_hi / s.x_lo) * per_decade)) + 1;
    const auto x = logspace(s.x_lo, s.x_hi, static_cast<std::size_t>(n));
    auto f = [&](double t) { return std::pow(t, s.power - 1.0) * std::pow(g(t), beta); };
    std::vector<double> lhs(x.size(), 0.0);
    auto piece = [&](double a, double b) { return integrate_log(f, a, b, panels_per_unit).value; };
    switch (s.range) {
        case Range::FromZero: {
            auto head = integrate_log(f, 0.0, x[0], panels_per_unit);
            if (!head.converged || !std::isfinite(head.value)) throw NumericalError("Karamata integral diverges at 0");
            lhs[0] = head.value;
            for (std::size_t i = 1; i < x.size(); ++i) lhs[i] = lhs[i - 1] + piece(x[i - 1], x[i]);
            break;
        }
        case Range::ToInfinity: {
            auto tail = integrate_log(f, x.back(), inf, panels_per_unit);
            if (!tail.converged || !std::isfinite(tail.value)) throw NumericalError("Karamata integral diverges at infinity");
            lhs.back() = tail.value;
            for (std::size_t i = x.size() - 1; i-- > 0;) lhs[i] = lhs[i + 1] + piece(x[i], x[i + 1]);
            break;
        }
        case Range::ToOne:
            for (std::size_t i = x.size() - 1; i-- > 0;) lhs[i] = lhs[i + 1] + piece(x[i], x[i + 1]);
            break;
        case Range::FromOne:
            for (std::size_t i = 1; i < x.size(); ++i) lhs[i] = lhs[i - 1] + piece(x[i - 1], x[i]);
            break;
    }
    double best = 0.0;
    if (rhs_out) rhs_out->clear();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double rhs = std::pow(x[i], s.power) * std::pow(g(x[i]), beta);
        if (rhs_out) rhs_out->push_back(rhs);
        best = std::max(best, lhs[i] / rhs);
    }
    return best;
}

}  // namespace

std::vector<KaramataResult> verify_karamata_integrals(const Profile& w, const ORVIndices& idx,
                                                      const std::vector<KaramataCase>& cases,
                                                      double drift_threshold) {
    std::vector<KaramataResult> out;
    std::optional<GeneralizedInverse> inverse;
    for (const auto& c : cases) {
        const CaseSetup s = setup_case(c, idx);
        Profile g = w;
        if (s.use_inverse) {
            if (!inverse) inverse.emplace(w);
            g = [&inverse](double t) { return (*inverse)(t); };
        }
        KaramataResult r;
        r.c = c;
        std::vector<double> rhs;
        r.sup_ratio = sup_ratio(g, s, c.beta, 10, 2.0, &rhs);
        r.refined_sup_ratio = sup_ratio(g, s, c.beta, 20, 4.0, nullptr);
        r.drift = std::fabs(r.refined_sup_ratio / r.sup_ratio - 1.0);
        // trend over the decade nearest the limit point
        const std::size_t per = 10;
        double first, last;
        if (s.limit_at_small) {
            first = rhs[per];
            last = rhs[0];
        } else {
            first = rhs[rhs.size() - 1 - per];
            last = rhs.back();
        }
        r.limit_claim = std::string(s.limit_at_small ? "x -> 0" : "x -> infinity") + ": x^tau w^beta -> " +
                        (s.limit_zero ? "0" : "infinity");
        r.limit_ok = s.limit_zero ? last < first : last > first;
        r.pass = std::isfinite(r.sup_ratio) && r.sup_ratio > 0.0 && r.drift < drift_threshold && r.limit_ok;
        out.push_back(r);
    }
    return out;
}

}  // namespace levy
