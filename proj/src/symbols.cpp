#include "levy/symbols.hpp"

#include <algorithm>
#include <cmath>

#include "levy/error.hpp"
#include "levy/hash.hpp"
#include "levy/parallel.hpp"
#include "levy/special.hpp"

namespace levy {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<double> default_direction(int dim) {
    std::vector<double> d(dim, 0.0);
    d[0] = 1.0;
    return d;
}

SymbolField pointwise(const SymbolEvaluator& ev, const FrequencyGrid& grid) {
    SymbolField f;
    f.grid = grid;
    f.values.resize(grid.size());
    // psi(-xi) = conj psi(xi): evaluate one node of each mirror pair
    parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
        double xi[3];
        for (std::size_t k = b; k < e; ++k) {
            if (grid.mirror(k) < k && !grid.on_nyquist_shell(k)) continue;
            grid.frequency(k, xi);
            f.values[k] = ev(xi);
        }
    });
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::size_t mk = grid.mirror(k);
        if (mk < k && !grid.on_nyquist_shell(k)) f.values[k] = std::conj(f.values[mk]);
    }
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (!std::isfinite(f.values[k].real()) || !std::isfinite(f.values[k].imag())) {
            double xi[3];
            grid.frequency(k, xi);
            throw NumericalError("symbol quadrature failed at lattice node " + std::to_string(k) + " (|xi| = " +
                                 format_double(grid.frequency_norm(k)) + ")");
        }
    }
    return f;
}

}  // namespace

const char* symbol_kind_name(SymbolKind k) {
    switch (k) {
        case SymbolKind::Full: return "full";
        case SymbolKind::Truncated: return "truncated";
        case SymbolKind::Fractional: return "fractional";
        case SymbolKind::Bessel: return "bessel";
    }
    return "?";
}

std::uint64_t SymbolField::hash() const {
    Fnv1a h;
    h.integer(static_cast<std::uint64_t>(grid.dim()));
    h.integer(grid.M());
    h.real(grid.extent());
    h.text(symbol_kind_name(kind));
    h.integer(measure_hash);
    for (const auto& v : values) {
        h.real(v.real());
        h.real(v.imag());
    }
    return h.value();
}

double stable_symbol_constant(int dim, double sigma) {
    const double sphere = 2.0 * std::pow(M_PI, 0.5 * (dim - 1)) * std::tgamma(0.5 * (sigma + 1.0)) /
                          std::tgamma(0.5 * (dim + sigma));
    return std::pow(2.0 * M_PI, sigma) * cosine_total(sigma) * sphere;
}

SymbolEvaluator::SymbolEvaluator(const LevyMeasure& m, double r_cut) : dim_(m.dim()), sigma_(m.sigma()) {
    if (m.kind() == MeasureKind::Stable && !std::isfinite(r_cut)) {
        closed_form_ = true;
        closed_coef_ = m.stable_scale() * stable_symbol_constant(dim_, sigma_);
        return;
    }
    for (const auto& k : m.kernels()) {
        std::vector<Direction> dirs;
        std::vector<bool> used(k.size(), false);
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (used[i]) continue;
            used[i] = true;
            Direction d{{0, 0, 0}, k.weights[i], k.weights[i]};
            for (int c = 0; c < dim_; ++c) d.z[c] = k.node(i)[c];
            for (std::size_t j = i + 1; j < k.size(); ++j) {
                if (used[j]) continue;
                bool opp = true;
                for (int c = 0; c < dim_; ++c) opp &= std::fabs(k.node(i)[c] + k.node(j)[c]) <= 1e-12;
                if (opp) {
                    used[j] = true;
                    d.even += k.weights[j];
                    d.odd -= k.weights[j];
                    break;
                }
            }
            if (std::fabs(d.odd) <= 1e-14 * std::fabs(d.even)) d.odd = 0.0;
            if (d.odd != 0.0) symmetric_ = false;
            if (d.even != 0.0 || d.odd != 0.0) dirs.push_back(d);
        }
        directions_.push_back(std::move(dirs));
    }
    for (const auto& p : m.pieces()) {
        const double hi = std::min(p.r_hi, r_cut);
        if (!(hi > p.r_lo)) continue;
        bool comp = sigma_ > 1.0 || (sigma_ == 1.0 && hi <= 1.0);
        terms_.push_back({p.r_lo, hi, p.coef, p.beta, comp, p.kernel});
    }
}

cplx SymbolEvaluator::operator()(const double* xi) const {
    if (closed_form_) {
        double n2 = 0.0;
        for (int c = 0; c < dim_; ++c) n2 += xi[c] * xi[c];
        if (n2 == 0.0) return 0.0;
        return -closed_coef_ * std::pow(n2, 0.5 * sigma_);
    }
    double re = 0.0, im = 0.0;
    for (const auto& t : terms_) {
        for (const auto& d : directions_[t.kernel]) {
            double u = 0.0;
            for (int c = 0; c < dim_; ++c) u += xi[c] * d.z[c];
            if (u == 0.0) continue;
            const double k = 2.0 * M_PI * std::fabs(u);
            const double kb = std::pow(k, t.beta);
            const double b = std::isfinite(t.hi) ? k * t.hi : inf;
            re -= t.coef * d.even * kb * cosine_gap_integral(k * t.lo, b, t.beta);
            if (d.odd != 0.0) {
                const double s = sine_gap_integral(k * t.lo, b, t.beta, t.compensated);
                im += t.coef * d.odd * (u > 0.0 ? 1.0 : -1.0) * kb * s;
            }
        }
    }
    return {re, im};
}

SymbolField compute_symbol(const LevyMeasure& m, const FrequencyGrid& grid) {
    if (grid.dim() != m.dim()) throw PreconditionError("frequency grid and measure dimensions differ");
    SymbolField f = pointwise(SymbolEvaluator(m), grid);
    f.kind = SymbolKind::Full;
    f.measure_hash = m.hash();
    f.symmetric = m.symmetric();
    if (f.symmetric)
        for (auto& v : f.values) v = {v.real(), 0.0};
    f.description = "psi[" + m.describe() + "]";
    return f;
}

SymbolField truncated_symbol(const LevyMeasure& scaled, const FrequencyGrid& grid) {
    if (grid.dim() != scaled.dim()) throw PreconditionError("frequency grid and measure dimensions differ");
    SymbolField f = pointwise(SymbolEvaluator(scaled, 1.0), grid);
    f.kind = SymbolKind::Truncated;
    f.measure_hash = scaled.hash();
    f.symmetric = scaled.symmetric();
    if (f.symmetric)
        for (auto& v : f.values) v = {v.real(), 0.0};
    f.description = "psi_cut[" + scaled.describe() + "]";
    return f;
}

namespace {
void require_real(const SymbolField& s, double tol, const char* what) {
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        const cplx v = s.values[k];
        if (std::fabs(v.imag()) > tol * std::max(1.0, std::abs(v)))
            throw PreconditionError(std::string(what) + " needs a real symbol (symmetrize the measure first); node " +
                                    std::to_string(k) + " has imaginary part " + format_double(v.imag()));
        if (v.real() > tol * std::max(1.0, std::abs(v)))
            throw PreconditionError(std::string(what) + " needs Re psi <= 0");
    }
}
}  // namespace

SymbolField fractional_symbol(const SymbolField& s, double delta, double imag_tol) {
    if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("fractional order must lie in (0, 1]");
    require_real(s, imag_tol, "fractional_symbol");
    SymbolField f = s;
    f.kind = SymbolKind::Fractional;
    f.description = "frac(" + std::to_string(delta) + ")[" + s.description + "]";
    if (delta == 1.0) return f;
    for (auto& v : f.values) v = -std::pow(std::max(0.0, -v.real()), delta);
    return f;
}

SymbolField bessel_symbol(const SymbolField& s, double order, double imag_tol) {
    require_real(s, imag_tol, "bessel_symbol");
    SymbolField f = s;
    f.kind = SymbolKind::Bessel;
    f.description = "bessel(" + std::to_string(order) + ")[" + s.description + "]";
    for (auto& v : f.values) v = order == 0.0 ? 1.0 : std::pow(1.0 - std::min(0.0, v.real()), order);
    return f;
}

NondegeneracyReport nondegeneracy_B(const LevyMeasure& m, const std::vector<double>& R_grid,
                                    const std::vector<double>& directions) {
    const int d = m.dim();
    if (directions.empty() || directions.size() % d != 0) throw PreconditionError("directions must be unit vectors of the measure's dimension");
    NondegeneracyReport rep;
    rep.value = inf;
    for (double R : R_grid) {
        const LevyMeasure s = m.scaled(R);
        double best = inf;
        for (std::size_t k = 0; k < directions.size(); k += d) {
            const double v = s.directional_second_moment(directions.data() + k, 1.0);
            best = std::min(best, v);
            rep.max_value = std::max(rep.max_value, v);
        }
        rep.R.push_back(R);
        rep.per_R.push_back(best);
        rep.value = std::min(rep.value, best);
    }
    rep.c0 = inf;
    for (const auto& p : m.pieces()) rep.c0 = std::min(rep.c0, m.kernels()[p.kernel].min_directional_second_moment(directions));
    rep.route2_value = inf;
    for (double R : R_grid) {
        const double wR = m.w(R);
        auto f = [&](double s) { return s * (wR / m.w(R * s) - 1.0); };
        const LogIntegral I = integrate_log(f, 0.0, 1.0, 4.0);
        const double v = rep.c0 * 2.0 * I.value;
        rep.route2_per_R.push_back(v);
        rep.route2_value = std::min(rep.route2_value, v);
    }
    const auto s = logspace(0.01, 0.99, 25);
    const auto rf = ratio_functions(w_profile(m), s);
    int c1 = 0, c2 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        c1 += rf.r1[i] < 1.0;
        c2 += rf.r2[i] < 1.0;
    }
    rep.r1_below_one_fraction = static_cast<double>(c1) / s.size();
    rep.r2_below_one_fraction = static_cast<double>(c2) / s.size();
    return rep;
}

TwoSidedBounds symbol_two_sided_bounds(const LevyMeasure& m, const Profile& w, const std::vector<double>& xi_norms,
                                       const std::vector<double>& direction) {
    const auto dir = direction.empty() ? default_direction(m.dim()) : direction;
    SymbolEvaluator ev(m);
    TwoSidedBounds b;
    b.c2 = inf;
    for (double r : xi_norms) {
        double xi[3] = {0, 0, 0};
        for (int c = 0; c < m.dim(); ++c) xi[c] = r * dir[c];
        const double v = -ev(xi).real() * w(1.0 / r);
        b.xi.push_back(r);
        b.ratio.push_back(v);
        b.c2 = std::min(b.c2, v);
        b.C1 = std::max(b.C1, v);
    }
    return b;
}

DecayFit fit_truncated_decay(const LevyMeasure& scaled, double kappa_ref, double xi_lo, double xi_hi, int points,
                             const std::vector<double>& direction) {
    const auto dir = direction.empty() ? default_direction(scaled.dim()) : direction;
    SymbolEvaluator ev(scaled, 1.0);
    const auto r = logspace(xi_lo, xi_hi, static_cast<std::size_t>(points));
    std::vector<double> lr, lv;
    for (double x : r) {
        double xi[3] = {0, 0, 0};
        for (int c = 0; c < scaled.dim(); ++c) xi[c] = x * dir[c];
        const double v = -ev(xi).real();
        if (!(v > 0.0)) throw NumericalError("truncated symbol does not decay at |xi| = " + format_double(x));
        lr.push_back(std::log(x));
        lv.push_back(std::log(v));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
        mx += lr[i];
        my += lv[i];
    }
    mx /= lr.size();
    my /= lr.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
        sxy += (lr[i] - mx) * (lv[i] - my);
        sxx += (lr[i] - mx) * (lr[i] - mx);
    }
    DecayFit f;
    f.kappa = sxy / sxx;
    f.kappa_ref = kappa_ref;
    f.c_fit = inf;
    f.c_ref = inf;
    for (std::size_t i = 0; i < lr.size(); ++i) {
        f.c_fit = std::min(f.c_fit, std::exp(lv[i] - f.kappa * lr[i]));
        f.c_ref = std::min(f.c_ref, std::exp(lv[i] - kappa_ref * lr[i]));
    }
    return f;
}

}  // namespace levy
