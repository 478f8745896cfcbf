#include "levy/densities.hpp"

#include <algorithm>
#include <cmath>

#include "levy/error.hpp"
#include "levy/hash.hpp"
#include "levy/kernels.hpp"

namespace levy {

namespace {

// spectrum of p(t, .): F p(xi) = exp(t psi(-xi))
std::vector<cplx> density_spectrum(const SymbolField& psi, double t) {
    const auto& g = psi.grid;
    std::vector<cplx> E(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) E[k] = std::exp(t * psi.values[g.mirror(k)]);
    return E;
}

void require_resolved(const SymbolField& psi, double t, const std::vector<cplx>& E, double tol) {
    if (tol < 0.0) return;
    const auto& g = psi.grid;
    double top = 0.0, shell = 0.0;
    std::size_t worst = 0;
    for (std::size_t k = 0; k < E.size(); ++k) {
        const double a = std::abs(E[k]);
        top = std::max(top, a);
        if (g.on_nyquist_shell(k) && a > shell) {
            shell = a;
            worst = k;
        }
    }
    if (!(top > 0.0) || shell <= tol * top) return;
    // power-law extrapolation of Re psi along the first axis
    const std::size_t stride = g.size() / g.M();
    const double r1 = -psi.values[(g.M() / 4) * stride].real(), r2 = -psi.values[(g.M() / 2) * stride].real();
    double need = 2.0 * g.extent();
    if (r1 > 0.0 && r2 > r1) {
        const double kappa = std::log(r2 / r1) / std::log(2.0);
        const double target = (std::log(top / shell) + std::log(1.0 / tol)) / t + r2;
        need = g.extent() * std::pow(target / r2, 1.0 / kappa);
    }
    throw UnderResolvedError("grid under-resolved for t = " + format_double(t) + ": |spectrum| at the Nyquist node " +
                                 std::to_string(worst) + " is " + format_double(shell / top) +
                                 " of its peak; need an extent of about " + format_double(need),
                             need);
}

DensityField finish(const FrequencyGrid& g, std::vector<cplx> E, double t, std::uint64_t hash, std::string op) {
    DensityField f;
    f.lattice = g.spatial();
    f.t = t;
    f.symbol_hash = hash;
    f.op = std::move(op);
    f.values = inverse_transform(g, std::move(E), &f.imag_residue);
    const double sup = kernels::max_abs(f.values.data(), f.values.size());
    if (f.imag_residue > 1e-10 * std::max(sup, 1e-300))
        throw NumericalError("inverse transform left an imaginary part of " + format_double(f.imag_residue));
    f.min_value = *std::min_element(f.values.begin(), f.values.end());
    return f;
}

}  // namespace

double DensityField::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * lattice.cell_volume();
}

std::uint64_t DensityField::hash() const {
    Fnv1a h;
    h.integer(static_cast<std::uint64_t>(lattice.dim()));
    h.integer(lattice.M());
    h.real(lattice.h());
    h.real(t);
    h.integer(symbol_hash);
    h.text(op);
    for (double v : values) h.real(v);
    return h.value();
}

Multiplier identity_multiplier(const FrequencyGrid& grid) { return {std::vector<cplx>(grid.size(), 1.0), "identity"}; }

Multiplier generator_multiplier(const SymbolField& plus) {
    return {plus.values, "L[" + plus.description + "]"};
}

Multiplier generator_multiplier(const SymbolField& plus, const SymbolField& minus) {
    if (!(plus.grid == minus.grid)) throw PreconditionError("signed measure components live on different grids");
    Multiplier m{plus.values, "L[" + plus.description + " - " + minus.description + "]"};
    for (std::size_t k = 0; k < m.values.size(); ++k) m.values[k] -= minus.values[k];
    return m;
}

Multiplier derivative_multiplier(const FrequencyGrid& grid, const std::vector<int>& k) {
    if (static_cast<int>(k.size()) != grid.dim()) throw PreconditionError("derivative multi-index has the wrong length");
    Multiplier m{std::vector<cplx>(grid.size()), "D^("};
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] < 0) throw PreconditionError("derivative orders must be nonnegative");
        m.description += (i ? "," : "") + std::to_string(k[i]);
    }
    m.description += ")";
    double xi[3];
    for (std::size_t n = 0; n < grid.size(); ++n) {
        grid.frequency(n, xi);
        cplx v = 1.0;
        for (int a = 0; a < grid.dim(); ++a)
            for (int p = 0; p < k[a]; ++p) v *= cplx(0.0, 2.0 * M_PI * xi[a]);
        m.values[n] = v;
    }
    return m;
}

Multiplier shift_multiplier(const FrequencyGrid& grid, const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != grid.dim()) throw PreconditionError("shift vector has the wrong length");
    Multiplier m{std::vector<cplx>(grid.size()), "shift"};
    double xi[3];
    for (std::size_t n = 0; n < grid.size(); ++n) {
        grid.frequency(n, xi);
        double ph = 0.0;
        for (int a = 0; a < grid.dim(); ++a) ph += xi[a] * y[a];
        m.values[n] = std::polar(1.0, -2.0 * M_PI * ph);
    }
    return m;
}

Multiplier compose(const Multiplier& a, const Multiplier& b) {
    if (a.values.size() != b.values.size()) throw PreconditionError("multipliers live on different grids");
    Multiplier m{a.values, a.description + " o " + b.description};
    kernels::cmul(m.values.data(), b.values.data(), m.values.size());
    return m;
}

Multiplier combine(double ca, const Multiplier& a, double cb, const Multiplier& b) {
    if (a.values.size() != b.values.size()) throw PreconditionError("multipliers live on different grids");
    Multiplier m{std::vector<cplx>(a.values.size()),
                 format_double(ca) + " " + a.description + " + " + format_double(cb) + " " + b.description};
    for (std::size_t k = 0; k < m.values.size(); ++k) m.values[k] = ca * a.values[k] + cb * b.values[k];
    return m;
}

DensityField density(const SymbolField& psi, double t, double decay_tol) {
    if (psi.kind != SymbolKind::Full && psi.kind != SymbolKind::Truncated)
        throw PreconditionError("densities need a full or truncated symbol");
    if (!(t > 0.0)) throw PreconditionError("density needs t > 0");
    auto E = density_spectrum(psi, t);
    require_resolved(psi, t, E, decay_tol);
    DensityField f = finish(psi.grid, std::move(E), t, psi.hash(), "identity");
    const double mass = f.mass();
    if (std::fabs(mass - 1.0) > 1e-6) throw NumericalError("density mass is " + format_double(mass) + ", not 1");
    if (f.min_value < -1e-8)
        f.warnings.push_back("spectral ringing: minimum density value " + format_double(f.min_value));
    return f;
}

DensityField apply_operator(const SymbolField& psi, double t, const Multiplier& op, double decay_tol) {
    if (!(t > 0.0)) throw PreconditionError("operator kernels need t > 0");
    if (op.values.size() != psi.grid.size()) throw PreconditionError("multiplier and symbol grids differ");
    auto E = density_spectrum(psi, t);
    kernels::cmul(E.data(), op.values.data(), E.size());
    require_resolved(psi, t, E, decay_tol);
    return finish(psi.grid, std::move(E), t, psi.hash(), op.description);
}

DensityField convolve(const DensityField& a, const DensityField& b) {
    if (!(a.lattice == b.lattice)) throw PreconditionError("convolution needs a common lattice");
    auto fa = forward_transform(a.lattice, a.values), fb = forward_transform(b.lattice, b.values);
    kernels::cmul(fa.data(), fb.data(), fa.size());
    DensityField out = finish(a.lattice.frequency_grid(), std::move(fa), a.t + b.t, a.symbol_hash, a.op + " * " + b.op);
    return out;
}

KernelStats kernel_statistics(const DensityField& f, double alpha, double radius) {
    KernelStats s;
    const double vol = f.lattice.cell_volume();
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        const double v = std::fabs(f.values[k]);
        const double r = f.lattice.radius(k);
        s.l1 += v;
        s.sup = std::max(s.sup, v);
        s.weighted_l1 += (1.0 + std::pow(r, alpha)) * v;
        if (r > radius) s.tail_l1 += v;
    }
    s.l1 *= vol;
    s.weighted_l1 *= vol;
    s.tail_l1 *= vol;
    return s;
}

bool interpolate_cubic(const Lattice& lat, const std::vector<double>& v, const double* x, double& out) {
    const int d = lat.dim();
    const std::size_t M = lat.M();
    long base[3];
    double w[3][4];
    for (int a = 0; a < d; ++a) {
        const double u = x[a] / lat.h() + static_cast<double>(M / 2);
        const double fl = std::floor(u);
        if (fl < 1.0 || fl > static_cast<double>(M) - 3.0) return false;
        base[a] = static_cast<long>(fl) - 1;
        const double s = u - fl;
        w[a][0] = -s * (s - 1.0) * (s - 2.0) / 6.0;
        w[a][1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        w[a][2] = -(s + 1.0) * s * (s - 2.0) / 2.0;
        w[a][3] = (s + 1.0) * s * (s - 1.0) / 6.0;
    }
    double acc = 0.0;
    const int count = d == 1 ? 4 : (d == 2 ? 16 : 64);
    for (int c = 0; c < count; ++c) {
        int rem = c;
        std::size_t idx = 0;
        double wt = 1.0;
        for (int a = 0; a < d; ++a) {
            const int o = rem % 4;
            rem /= 4;
            idx = idx * M + static_cast<std::size_t>(base[a] + o);
            wt *= w[a][o];
        }
        acc += wt * v[idx];
    }
    out = acc;
    return true;
}

ScalingReport scaling_identity_check(const LevyMeasure& m, const GeneralizedInverse& a, const std::vector<double>& t_grid,
                                     const FrequencyGrid& grid, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("fractional order must lie in (0, 1]");
    const SymbolField psi = compute_symbol(m, grid);
    const int d = grid.dim();
    auto kernel = [&](const SymbolField& s, double t) {
        if (delta == 1.0) return density(s, t);
        return apply_operator(s, t, generator_multiplier(fractional_symbol(s, delta)));
    };
    ScalingReport rep;
    for (double t : t_grid) {
        const double at = a(t);
        const DensityField lhs = kernel(psi, t);
        const SymbolField tilde = compute_symbol(m.scaled(at), grid);
        const DensityField rhs = kernel(tilde, 1.0);
        const double pre = std::pow(at, -d) * (delta == 1.0 ? 1.0 : std::pow(t, -delta));
        double num = 0.0, den = 0.0, l1n = 0.0, l1d = 0.0;
        std::size_t used = 0;
        double x[3], y[3];
        for (std::size_t k = 0; k < lhs.values.size(); ++k) {
            lhs.lattice.coordinates(k, x);
            for (int c = 0; c < d; ++c) y[c] = x[c] / at;
            double r;
            if (!interpolate_cubic(rhs.lattice, rhs.values, y, r)) continue;
            r *= pre;
            const double diff = std::fabs(lhs.values[k] - r);
            num = std::max(num, diff);
            den = std::max(den, std::fabs(lhs.values[k]));
            l1n += diff;
            l1d += std::fabs(lhs.values[k]);
            ++used;
        }
        if (used == 0) throw PreconditionError("rescaled lattice does not overlap the comparison region at t = " + format_double(t));
        ScalingRow row{t, at, num / den, l1n / l1d, used};
        rep.max_linf = std::max(rep.max_linf, row.linf);
        rep.max_l1 = std::max(rep.max_l1, row.l1);
        rep.rows.push_back(row);
    }
    return rep;
}

DecayReport decay_moment_check(const LevyMeasure& m, const FrequencyGrid& grid, double alpha2,
                               const std::vector<std::vector<int>>& derivatives, const std::vector<double>& R_grid) {
    if (!(alpha2 > 0.0)) throw PreconditionError("alpha2 must be positive");
    const FrequencyGrid wide(grid.dim(), grid.M() * 2, grid.extent());
    DecayReport rep;
    rep.alpha2 = alpha2;
    std::vector<std::vector<double>> sups(derivatives.size()), weights(derivatives.size());
    for (double R : R_grid) {
        const LevyMeasure s = m.scaled(R);
        const SymbolField psi = compute_symbol(s, grid), psi_wide = compute_symbol(s, wide);
        for (std::size_t j = 0; j < derivatives.size(); ++j) {
            const auto& k = derivatives[j];
            const auto a = kernel_statistics(apply_operator(psi, 1.0, derivative_multiplier(grid, k)), alpha2);
            const auto b = kernel_statistics(apply_operator(psi_wide, 1.0, derivative_multiplier(wide, k)), alpha2);
            rep.rows.push_back({k, R, a.sup, a.weighted_l1, b.sup, b.weighted_l1});
            rep.max_sup = std::max(rep.max_sup, a.sup);
            rep.max_weighted = std::max(rep.max_weighted, a.weighted_l1);
            rep.extent_growth = std::max(rep.extent_growth, b.weighted_l1 / a.weighted_l1 - 1.0);
            sups[j].push_back(a.sup);
            weights[j].push_back(a.weighted_l1);
        }
    }
    for (std::size_t j = 0; j < derivatives.size(); ++j)
        for (const auto* v : {&sups[j], &weights[j]}) {
            if (v->empty()) continue;
            const auto [lo, hi] = std::minmax_element(v->begin(), v->end());
            rep.R_spread = std::max(rep.R_spread, (*hi - *lo) / *hi);
        }
    return rep;
}

KernelDifference kernel_difference_statistics(const SymbolField& psi, const Multiplier& op, double t, double s_shift,
                                              const std::vector<double>& y_shift, double decay_tol) {
    if (!(t > 0.0)) throw PreconditionError("kernel differences need t > 0");
    if (!(t - s_shift > 0.0)) throw PreconditionError("time shift must satisfy t - s > 0");
    const auto& g = psi.grid;
    KernelDifference out;
    auto E = density_spectrum(psi, t);
    kernels::cmul(E.data(), op.values.data(), E.size());
    require_resolved(psi, t, E, decay_tol);
    bool zero_shift = true;
    for (double v : y_shift) zero_shift &= v == 0.0;
    if (!zero_shift) {
        const Multiplier sh = shift_multiplier(g, y_shift);
        std::vector<cplx> D(E.size());
        for (std::size_t k = 0; k < E.size(); ++k) D[k] = (sh.values[k] - 1.0) * E[k];
        out.space_diff = kernel_statistics(finish(g, std::move(D), t, 0, "space difference")).l1;
    }
    if (s_shift != 0.0) {
        auto Es = density_spectrum(psi, t - s_shift);
        kernels::cmul(Es.data(), op.values.data(), Es.size());
        require_resolved(psi, t - s_shift, Es, decay_tol);
        for (std::size_t k = 0; k < Es.size(); ++k) Es[k] -= E[k];
        out.time_diff = kernel_statistics(finish(g, std::move(Es), t, 0, "time difference")).l1;
    }
    return out;
}

}  // namespace levy
