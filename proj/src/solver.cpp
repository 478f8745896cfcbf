#include "levy/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "levy/error.hpp"
#include "levy/hash.hpp"
#include "levy/parallel.hpp"

namespace levy {

namespace {

using Spectrum = std::vector<cplx>;

// phi_1(z) = (e^z - 1)/z, phi_2(z) = (e^z - 1 - z)/z^2
void phi12(cplx z, cplx& p1, cplx& p2) {
    if (std::abs(z) < 0.1) {
        cplx term = 1.0, s1 = 0.0, s2 = 0.0;
        double f1 = 1.0, f2 = 2.0;  // (n+1)!, (n+2)!
        for (int n = 0; n < 10; ++n) {
            s1 += term / f1;
            s2 += term / f2;
            term *= z;
            f1 *= n + 2;
            f2 *= n + 3;
        }
        p1 = s1;
        p2 = s2;
        return;
    }
    const cplx e = std::exp(z);
    p1 = (e - 1.0) / z;
    p2 = (e - 1.0 - z) / (z * z);
}

Spectrum to_spec(const Lattice& lat, const std::vector<double>& f) { return dft_real(lat, f); }

std::vector<double> to_space(const Lattice& lat, Spectrum s) {
    std::vector<double> out;
    idft_real(lat.dim(), lat.M(), s, out);
    return out;
}

void check_grid(const SymbolField& psi, const Lattice& lat) {
    if (!(lat.frequency_grid() == psi.grid)) throw PreconditionError("lattice function and symbol live on different grids");
}

void check_times(const std::vector<double>& t) {
    if (t.size() < 2) throw PreconditionError("time grid needs at least two nodes");
    if (t.front() != 0.0) throw PreconditionError("time grid must start at 0");
    for (std::size_t k = 1; k < t.size(); ++k)
        if (!(t[k] > t[k - 1])) throw PreconditionError("time grid must be strictly increasing");
}

// per-mode step coefficients for one interval length
struct Step {
    double dt = -1.0;
    Spectrum E, w0, w1;  // u_{k+1} = E u_k + w0 f_k + w1 f_{k+1}
};

void make_step(Step& st, const SymbolField& psi, double lambda, double dt, TimeRule rule) {
    if (st.dt == dt) return;
    st.dt = dt;
    const std::size_t n = psi.values.size();
    st.E.resize(n);
    st.w0.resize(n);
    st.w1.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx a = psi.values[k] - lambda;
        const cplx E = std::exp(a * dt);
        st.E[k] = E;
        if (rule == TimeRule::Trapezoid) {
            st.w0[k] = 0.5 * dt * E;
            st.w1[k] = 0.5 * dt;
        } else {
            cplx p1, p2;
            phi12(a * dt, p1, p2);
            st.w0[k] = dt * (p1 - p2);
            st.w1[k] = dt * p2;
        }
    }
}

// spectral resolvent recursion; F[k] are the spectra of the integrand at the nodes
std::vector<Spectrum> resolvent_spec(const SymbolField& psi, double lambda, const std::vector<double>& t,
                                     const std::vector<Spectrum>& F, TimeRule rule) {
    const std::size_t n = psi.values.size();
    std::vector<Spectrum> U(t.size(), Spectrum(n, 0.0));
    Step st;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        make_step(st, psi, lambda, t[k + 1] - t[k], rule);
        const Spectrum& a = F[k];
        const Spectrum& b = F[k + 1];
        for (std::size_t i = 0; i < n; ++i) U[k + 1][i] = st.E[i] * U[k][i] + st.w0[i] * a[i] + st.w1[i] * b[i];
    }
    return U;
}

void check_marks(const MarkedTimeField& Phi, const JumpSample& jumps) {
    if (Phi.weights.empty()) throw PreconditionError("Phi has no marks");
    for (const auto& node : Phi.values)
        if (node.size() != Phi.weights.size()) throw PreconditionError("Phi must carry one field per mark at every node");
    if (!jumps.times.empty() && jumps.marks.size() != jumps.times.size())
        throw PreconditionError("jump sample carries no marks; use simulate_poisson_measure");
    for (auto z : jumps.marks)
        if (z >= Phi.weights.size()) throw PreconditionError("jump mark outside Phi's mark set");
    double tot = 0.0;
    for (double w : Phi.weights) tot += w;
    if (!jumps.times.empty() || jumps.intensity > 0.0)
        if (std::fabs(jumps.intensity - tot) > 1e-12 * std::max(1.0, tot))
            throw PreconditionError("jump sample intensity does not match Phi's mark weights");
}

// Phi(s, ., z) spectrum, linear in time between nodes
Spectrum phi_at(const std::vector<std::vector<Spectrum>>& P, const std::vector<double>& t, double s, std::size_t z) {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    if (k + 1 >= t.size()) return P.back()[z];
    const double th = (s - t[k]) / (t[k + 1] - t[k]);
    Spectrum out(P[k][z].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - th) * P[k][z][i] + th * P[k + 1][z][i];
    return out;
}

std::vector<std::vector<Spectrum>> phi_spectra(const Lattice& lat, const MarkedTimeField& Phi) {
    std::vector<std::vector<Spectrum>> P(Phi.values.size());
    parallel_for(P.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k)
            for (const auto& f : Phi.values[k]) P[k].push_back(to_spec(lat, f));
    });
    return P;
}

// -sum_z Pi_z Phi(t_k, ., z)
std::vector<Spectrum> compensator_integrand(const MarkedTimeField& Phi, const std::vector<std::vector<Spectrum>>& P) {
    std::vector<Spectrum> F(P.size(), Spectrum(P.front().front().size(), 0.0));
    for (std::size_t k = 0; k < P.size(); ++k)
        for (std::size_t z = 0; z < Phi.weights.size(); ++z)
            for (std::size_t i = 0; i < F[k].size(); ++i) F[k][i] -= Phi.weights[z] * P[k][z][i];
    return F;
}

Lattice lattice_of(const SymbolField& psi) { return psi.grid.spatial(); }

std::vector<Spectrum> stochastic_spec(const SymbolField& psi, double lambda, const MarkedTimeField& Phi, const JumpSample& jumps,
                                      TimeRule rule) {
    const Lattice lat = lattice_of(psi);
    check_times(Phi.times);
    check_marks(Phi, jumps);
    const auto P = phi_spectra(lat, Phi);
    const auto& t = Phi.times;
    auto U = resolvent_spec(psi, lambda, t, compensator_integrand(Phi, P), rule);
    const std::size_t n = psi.values.size();
    Spectrum J(n, 0.0);
    Step st;
    std::size_t next = 0;
    while (next < jumps.times.size() && jumps.times[next] <= 0.0) ++next;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        make_step(st, psi, lambda, t[k + 1] - t[k], rule);
        for (std::size_t i = 0; i < n; ++i) J[i] *= st.E[i];
        while (next < jumps.times.size() && jumps.times[next] <= t[k + 1]) {
            const double s = jumps.times[next];
            const Spectrum ph = phi_at(P, t, s, jumps.marks[next]);
            const double lag = t[k + 1] - s;
            for (std::size_t i = 0; i < n; ++i) J[i] += std::exp((psi.values[i] - lambda) * lag) * ph[i];
            ++next;
        }
        for (std::size_t i = 0; i < n; ++i) U[k + 1][i] += J[i];
    }
    return U;
}

TimeField to_time_field(const Lattice& lat, const std::vector<double>& t, std::vector<Spectrum> U) {
    TimeField out;
    out.times = t;
    out.values.resize(U.size());
    parallel_for(U.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) out.values[k] = to_space(lat, std::move(U[k]));
    });
    return out;
}

std::uint64_t noise_hash(const JumpSample& j) {
    Fnv1a h;
    h.real(j.T);
    h.real(j.intensity);
    for (double t : j.times) h.real(t);
    for (auto m : j.marks) h.integer(m);
    for (double y : j.jumps) h.real(y);
    return h.value();
}

}  // namespace

std::vector<double> uniform_time_grid(double T, std::size_t K) {
    if (!(T > 0.0)) throw PreconditionError("horizon T must be positive");
    if (K == 0) throw PreconditionError("time grid needs at least one interval");
    std::vector<double> t(K + 1);
    for (std::size_t k = 0; k <= K; ++k) t[k] = k == K ? T : T * static_cast<double>(k) / static_cast<double>(K);
    return t;
}

double lp_norm(const Lattice& lat, const std::vector<double>& f, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f) m = std::max(m, std::fabs(v));
        return m;
    }
    double s = 0.0;
    for (double v : f) s += std::pow(std::fabs(v), p);
    return std::pow(s * lat.cell_volume(), 1.0 / p);
}

std::uint64_t SolutionField::hash() const {
    Fnv1a h;
    h.integer(lattice.dim());
    h.integer(lattice.M());
    h.real(lattice.h());
    h.real(lambda);
    h.integer(noise_hash);
    for (double t : times) h.real(t);
    for (const auto& v : u)
        for (double x : v) h.real(x);
    return h.value();
}

std::vector<double> semigroup_apply(const SymbolField& psi, double lambda, double t, const std::vector<double>& g,
                                    double decay_tol) {
    const Lattice lat = lattice_of(psi);
    if (g.size() != lat.size()) throw PreconditionError("lattice function size mismatch");
    if (t < 0.0) throw PreconditionError("semigroup time must be nonnegative");
    if (t == 0.0) return g;
    Spectrum s = to_spec(lat, g);
    double peak = 0.0, shell = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        s[k] *= std::exp(t * (psi.values[k] - lambda));
        const double a = std::abs(s[k]);
        peak = std::max(peak, a);
        if (psi.grid.on_nyquist_shell(k)) shell = std::max(shell, a);
    }
    if (decay_tol >= 0.0 && peak > 0.0 && shell > decay_tol * peak) {
        std::ostringstream os;
        os << "T_t g is not band-limited on this grid at t = " << t << ": Nyquist content " << shell / peak
           << " of the peak; refine the lattice or smooth g";
        throw UnderResolvedError(os.str(), 2.0 * psi.grid.extent());
    }
    return to_space(lat, std::move(s));
}

TimeField resolvent_apply(const SymbolField& psi, double lambda, const TimeField& f, TimeRule rule) {
    if (f.empty()) throw PreconditionError("resolvent needs f on a nonempty time grid");
    check_times(f.times);
    if (f.values.size() != f.times.size()) throw PreconditionError("f must be sampled at every time node");
    if (lambda < 0.0) throw PreconditionError("lambda must be nonnegative");
    const Lattice lat = lattice_of(psi);
    std::vector<Spectrum> F(f.values.size());
    parallel_for(F.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) F[k] = to_spec(lat, f.values[k]);
    });
    return to_time_field(lat, f.times, resolvent_spec(psi, lambda, f.times, F, rule));
}

TimeField stochastic_convolution(const SymbolField& psi, double lambda, const MarkedTimeField& Phi, const JumpSample& jumps,
                                 TimeRule rule) {
    if (lambda < 0.0) throw PreconditionError("lambda must be nonnegative");
    return to_time_field(lattice_of(psi), Phi.times, stochastic_spec(psi, lambda, Phi, jumps, rule));
}

SolutionField solve(const SymbolField& psi, const InputData& in, const JumpSample& jumps, const std::vector<double>& time_grid,
                    TimeRule rule) {
    check_times(time_grid);
    check_grid(psi, in.lattice);
    if (in.lambda < 0.0) throw PreconditionError("lambda must be nonnegative");
    if (std::fabs(time_grid.back() - in.T) > 1e-12 * in.T) throw PreconditionError("time grid must end at T");
    const Lattice& lat = in.lattice;
    const std::size_t K = time_grid.size();
    SolutionField sol;
    sol.lattice = lat;
    sol.times = time_grid;
    sol.lambda = in.lambda;
    sol.noise_hash = noise_hash(jumps);
    sol.u.assign(K, std::vector<double>(lat.size(), 0.0));
    if (!in.g.empty()) {
        if (in.g.size() != lat.size()) throw PreconditionError("g has the wrong size");
        sol.u[0] = in.g;
        parallel_for(K - 1, [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b + 1; k < e + 1; ++k) sol.u[k] = semigroup_apply(psi, in.lambda, time_grid[k], in.g, -1.0);
        });
    }
    auto add = [&](const TimeField& r) {
        if (r.times != time_grid) throw PreconditionError("input sampled on a different time grid");
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < lat.size(); ++i) sol.u[k][i] += r.values[k][i];
    };
    if (!in.f.empty()) add(resolvent_apply(psi, in.lambda, in.f, rule));
    if (!in.Phi.empty()) add(stochastic_convolution(psi, in.lambda, in.Phi, jumps, rule));
    if (!in.g.empty()) sol.u[0] = in.g;
    return sol;
}

ResidualReport residual_check(const SolutionField& sol, const SymbolField& psi, const InputData& in, const JumpSample& jumps,
                              double p) {
    const auto& t = sol.times;
    check_times(t);
    const Lattice& lat = sol.lattice;
    check_grid(psi, lat);
    const std::size_t K = t.size(), n = lat.size();
    const double dt = t[1] - t[0];
    for (std::size_t k = 1; k < K; ++k)
        if (std::fabs(t[k] - t[k - 1] - dt) > 1e-9 * dt) throw PreconditionError("residual check needs a uniform time grid");
    std::vector<Spectrum> U(K), V(K);
    const Spectrum g = in.g.empty() ? Spectrum(n, 0.0) : to_spec(lat, in.g);
    parallel_for(K, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            U[k] = to_spec(lat, sol.u[k]);
            V[k].resize(n);
            for (std::size_t i = 0; i < n; ++i) V[k][i] = (psi.values[i] - in.lambda) * U[k][i];
            if (!in.f.empty()) {
                const Spectrum f = to_spec(lat, in.f.values.at(k));
                for (std::size_t i = 0; i < n; ++i) V[k][i] += f[i];
            }
        }
    });
    std::vector<std::vector<Spectrum>> P;
    std::vector<Spectrum> C;
    if (!in.Phi.empty()) {
        check_marks(in.Phi, jumps);
        if (in.Phi.times != t) throw PreconditionError("Phi sampled on a different time grid");
        P = phi_spectra(lat, in.Phi);
        C = compensator_integrand(in.Phi, P);
    }
    ResidualReport rep;
    rep.p = p;
    rep.residual.assign(K, 0.0);
    Spectrum Q(n, 0.0), S(n, 0.0);
    std::size_t next = 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (k > 0) {
            for (std::size_t i = 0; i < n; ++i) Q[i] += 0.5 * dt * (V[k - 1][i] + V[k][i]);
            if (!C.empty())
                for (std::size_t i = 0; i < n; ++i) Q[i] += 0.5 * dt * (C[k - 1][i] + C[k][i]);
            while (!P.empty() && next < jumps.times.size() && jumps.times[next] <= t[k]) {
                const Spectrum ph = phi_at(P, t, jumps.times[next], jumps.marks[next]);
                for (std::size_t i = 0; i < n; ++i) S[i] += ph[i];
                ++next;
            }
        }
        Spectrum r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = U[k][i] - g[i] - Q[i] - S[i];
        rep.residual[k] = lp_norm(lat, to_space(lat, std::move(r)), p);
        rep.max_residual = std::max(rep.max_residual, rep.residual[k]);
    }
    return rep;
}

KunitaReport kunita_check(const SymbolField& psi, const MarkedTimeField& Phi, const std::vector<double>& lambdas,
                          const std::vector<double>& scales, double p, std::size_t paths, std::uint64_t seed) {
    if (paths == 0) throw PreconditionError("Kunita check needs at least one path");
    check_times(Phi.times);
    const Lattice lat = lattice_of(psi);
    const auto& t = Phi.times;
    const double T = t.back();
    const std::size_t K = t.size();
    std::vector<double> tw(K, 0.0);  // trapezoid weights
    for (std::size_t k = 0; k + 1 < K; ++k) {
        tw[k] += 0.5 * (t[k + 1] - t[k]);
        tw[k + 1] += 0.5 * (t[k + 1] - t[k]);
    }
    // input terms at scale 1
    double A = 0.0, B = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> sq(lat.size(), 0.0);
        double b = 0.0;
        for (std::size_t z = 0; z < Phi.weights.size(); ++z) {
            const auto& f = Phi.values[k][z];
            for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += Phi.weights[z] * f[i] * f[i];
            b += Phi.weights[z] * std::pow(lp_norm(lat, f, p), p);
        }
        for (auto& v : sq) v = std::sqrt(v);
        A += tw[k] * std::pow(lp_norm(lat, sq, p), p);
        B += tw[k] * b;
    }
    MarkIntensity pi{Phi.weights};
    KunitaReport rep;
    rep.p = p;
    double lo = INFINITY;
    for (double lam : lambdas)
        for (double sc : scales) {
            MarkedTimeField S = Phi;
            for (auto& node : S.values)
                for (auto& f : node)
                    for (auto& v : f) v *= sc;
            double lhs = 0.0;
            for (std::size_t i = 0; i < paths; ++i) {
                const auto jumps = simulate_poisson_measure(pi, T, seed, i);
                const auto r = stochastic_convolution(psi, lam, S, jumps);
                for (std::size_t k = 0; k < K; ++k) lhs += tw[k] * std::pow(lp_norm(lat, r.values[k], p), p);
            }
            lhs /= static_cast<double>(paths);
            const double rho = lam > 0.0 ? std::min(1.0 / lam, T) : T;
            const double scp = std::pow(sc, p);
            const double rhs = scp * (std::pow(rho, 0.5 * p) * A + rho * B);
            const double ratio = lhs / rhs;
            rep.rows.push_back({lam, sc, lhs, rhs, ratio});
            rep.C = std::max(rep.C, ratio);
            lo = std::min(lo, ratio);
        }
    rep.spread = rep.C / lo;
    return rep;
}

void write_solution_csv_norms(const std::string& path, const SolutionField& sol, double p) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f.precision(17);
    f << "t,norm\n";
    for (std::size_t k = 0; k < sol.times.size(); ++k) f << sol.times[k] << "," << lp_norm(sol.lattice, sol.u[k], p) << "\n";
}

}  // namespace levy
