#include "levy/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "levy/error.hpp"
#include "levy/kernels.hpp"
#include "levy/parallel.hpp"

namespace levy {

namespace {

double theta(double u) {
    if (std::fabs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

// sum_k theta(u - k), periodic in u and positive everywhere
double theta_sum(double u) {
    const double f = u - std::floor(u);
    return theta(f) + theta(f - 1.0);
}

double log_base(int N, double x) { return std::log(x) / std::log(static_cast<double>(N)); }

void check_field(const MarkedField& f) {
    if (f.channels.empty()) throw PreconditionError("lattice function has no channels");
    for (const auto& c : f.channels)
        if (c.size() != f.lattice.size()) throw PreconditionError("lattice function size mismatch");
    if (f.marked() && f.weights.size() != f.channels.size())
        throw PreconditionError("mark weights and channels differ in number");
    for (double w : f.weights)
        if (!(w >= 0.0)) throw PreconditionError("mark weights must be nonnegative");
}

void check_spec(const MarkedField& f, const NormSpec& spec) {
    if (!(spec.p > 1.0)) throw PreconditionError("norm exponent p must exceed 1");
    if (spec.q != 0.0 && spec.q < 1.0) throw PreconditionError("Besov exponent q must be at least 1");
    if (spec.r == 0.0 && f.marked()) throw PreconditionError("marked field needs a mark exponent r > 0");
    if (spec.r != 0.0 && !f.marked()) throw PreconditionError("mark exponent r > 0 needs a marked field");
    if (spec.s != 0.0 && !spec.w) throw PreconditionError("nonzero smoothness needs a tail profile w");
}

std::vector<double> block_weights(const DyadicSystem& sys, const NormSpec& spec) {
    std::vector<double> w(sys.blocks(), 1.0);
    if (spec.s == 0.0) return w;
    for (int j = 0; j < sys.blocks(); ++j) {
        const double wr = spec.w(std::pow(static_cast<double>(sys.base()), -j));
        if (!(wr > 0.0) || !std::isfinite(wr)) throw NumericalError("tail profile is not positive at a block radius");
        w[j] = std::pow(wr, -spec.s);
    }
    return w;
}

// |v|_{V_r} at one node
double mark_norm(const MarkedField& f, const std::vector<const std::vector<double>*>& ch, std::size_t node, double r) {
    if (!f.marked()) return std::fabs((*ch[0])[node]);
    double acc = 0.0;
    for (std::size_t i = 0; i < ch.size(); ++i) acc += f.weights[i] * std::pow(std::fabs((*ch[i])[node]), r);
    return std::pow(acc, 1.0 / r);
}

// blocks[c][j]
using BlockSet = std::vector<std::vector<std::vector<double>>>;

BlockSet all_blocks(const MarkedField& f, const DyadicSystem& sys) {
    BlockSet b(f.channels.size());
    for (std::size_t c = 0; c < f.channels.size(); ++c) b[c] = lp_blocks(f.lattice, f.channels[c], sys);
    return b;
}

double truncation(const BlockSet& b, const DyadicSystem& sys) {
    double tot = 0.0, out = 0.0;
    for (const auto& ch : b)
        for (int j = 0; j < sys.blocks(); ++j) {
            const double e = kernels::sum_sq(ch[j].data(), ch[j].size());
            tot += e;
            if (j > sys.j_resolved()) out += e;
        }
    return tot > 0.0 ? out / tot : 0.0;
}

void warn_truncation(NormResult& r) {
    if (r.truncation_fraction > 1e-3) {
        std::ostringstream os;
        os << "blocks past the resolved range carry " << r.truncation_fraction * 100 << "% of the energy";
        r.warnings.push_back(os.str());
    }
}

}  // namespace

DyadicSystem::DyadicSystem(int N, const FrequencyGrid& grid) : N_(N), grid_(grid) {
    if (N < 2) throw PreconditionError("dyadic base N must be at least 2");
    const double Nd = N;
    const double xi_max = grid.extent() * std::sqrt(static_cast<double>(grid.dim()));
    j_max_ = 0;
    while (std::pow(Nd, j_max_) < xi_max) ++j_max_;
    j_resolved_ = -1;
    while (std::pow(Nd, j_resolved_ + 2) <= grid.extent() * (1.0 + 1e-12)) ++j_resolved_;
    if (j_resolved_ < 3) {
        std::ostringstream os;
        os << "grid too coarse for base " << N << ": resolves " << j_resolved_ + 1
           << " dyadic blocks, need 4 (extent " << grid.extent() << ", need " << std::pow(Nd, 4) << ")";
        throw PreconditionError(os.str());
    }
    blocks_.assign(j_max_ + 1, std::vector<double>(grid.size(), 0.0));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid.frequency_norm(k);
        if (r == 0.0) {
            blocks_[0][k] = 1.0;
            continue;
        }
        const double u = log_base(N, r);
        const double S = theta_sum(u);
        double rest = 0.0;
        for (int j = std::max(1, static_cast<int>(std::floor(u))); j <= std::min(j_max_, static_cast<int>(std::floor(u)) + 1); ++j) {
            const double v = theta(u - j) / S;
            blocks_[j][k] = v;
            rest += v;
        }
        blocks_[0][k] = u < 1.0 ? 1.0 - rest : 0.0;
    }
}

std::vector<double> DyadicSystem::fattened(int j) const {
    std::vector<double> f = block(j);
    for (int l : {j - 1, j + 1}) {
        if (l < 0 || l > j_max_) continue;
        const auto& b = blocks_[l];
        for (std::size_t k = 0; k < f.size(); ++k) f[k] += b[k];
    }
    return f;
}

double DyadicSystem::profile(int N, double xi_norm) {
    if (!(xi_norm > 0.0)) return 0.0;
    const double u = log_base(N, xi_norm);
    return theta(u) / theta_sum(u);
}

double DyadicSystem::partition_sum(int N, double xi_norm) {
    if (!(xi_norm > 0.0)) return 0.0;
    const double u = log_base(N, xi_norm);
    const int k = static_cast<int>(std::floor(u));
    double s = 0.0;
    for (int j = k - 2; j <= k + 2; ++j) s += profile(N, xi_norm * std::pow(static_cast<double>(N), -j));
    return s;
}

MarkedField MarkedField::unmarked(const Lattice& lat, std::vector<double> f) {
    MarkedField m;
    m.lattice = lat;
    m.channels.push_back(std::move(f));
    return m;
}

std::vector<double> lp_project(const Lattice& lat, const std::vector<double>& f, const DyadicSystem& sys, int j) {
    if (!(lat.frequency_grid() == sys.grid())) throw PreconditionError("function and dyadic system live on different lattices");
    if (j < 0) throw PreconditionError("block index must be nonnegative");
    if (j > sys.j_max()) return std::vector<double>(f.size(), 0.0);
    auto c = dft_real(lat, f);
    kernels::rmul(c.data(), sys.block(j).data(), c.size());
    std::vector<double> out;
    idft_real(lat.dim(), lat.M(), c, out);
    return out;
}

std::vector<std::vector<double>> lp_blocks(const Lattice& lat, const std::vector<double>& f, const DyadicSystem& sys) {
    if (!(lat.frequency_grid() == sys.grid())) throw PreconditionError("function and dyadic system live on different lattices");
    const auto spec = dft_real(lat, f);
    std::vector<std::vector<double>> out(sys.blocks());
    parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            auto c = spec;
            kernels::rmul(c.data(), sys.block(static_cast<int>(j)).data(), c.size());
            idft_real(lat.dim(), lat.M(), c, out[j]);
        }
    });
    return out;
}

NormResult besov_norm(const MarkedField& f, const DyadicSystem& sys, const NormSpec& spec) {
    check_field(f);
    check_spec(f, spec);
    const auto B = all_blocks(f, sys);
    const auto w = block_weights(sys, spec);
    const double q = spec.q == 0.0 ? spec.p : spec.q;
    const double cell = f.lattice.cell_volume();
    NormResult res;
    res.kind = "besov";
    std::vector<const std::vector<double>*> ch(B.size());
    double acc = 0.0;
    for (int j = 0; j < sys.blocks(); ++j) {
        for (std::size_t c = 0; c < B.size(); ++c) ch[c] = &B[c][j];
        double I = 0.0;
        for (std::size_t k = 0; k < f.lattice.size(); ++k) I += std::pow(mark_norm(f, ch, k, spec.r), spec.p);
        const double bn = std::pow(I * cell, 1.0 / spec.p);
        acc += std::pow(w[j] * bn, q);
    }
    res.value = std::pow(acc, 1.0 / q);
    res.truncation_fraction = truncation(B, sys);
    warn_truncation(res);
    return res;
}

NormResult bessel_norm(const MarkedField& f, const DyadicSystem& sys, const NormSpec& spec) {
    check_field(f);
    check_spec(f, spec);
    const auto B = all_blocks(f, sys);
    const auto w = block_weights(sys, spec);
    NormResult res;
    res.kind = "bessel";
    std::vector<double> sq(f.lattice.size(), 0.0);
    std::vector<const std::vector<double>*> ch(B.size());
    for (int j = 0; j < sys.blocks(); ++j) {
        for (std::size_t c = 0; c < B.size(); ++c) ch[c] = &B[c][j];
        const double w2 = w[j] * w[j];
        for (std::size_t k = 0; k < sq.size(); ++k) {
            const double v = mark_norm(f, ch, k, spec.r);
            sq[k] += w2 * v * v;
        }
    }
    double I = 0.0;
    for (double v : sq) I += std::pow(v, 0.5 * spec.p);
    res.value = std::pow(I * f.lattice.cell_volume(), 1.0 / spec.p);
    res.truncation_fraction = truncation(B, sys);
    warn_truncation(res);
    return res;
}

MarkedField apply_J(const MarkedField& f, const SymbolField& sym_symbol, double t) {
    check_field(f);
    if (!(f.lattice.frequency_grid() == sym_symbol.grid)) throw PreconditionError("function and symbol live on different lattices");
    MarkedField out = f;
    if (t == 0.0) return out;
    const auto J = bessel_symbol(sym_symbol, t);
    std::vector<double> m(J.values.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = J.values[k].real();
    for (auto& c : out.channels) {
        auto s = dft_real(f.lattice, c);
        kernels::rmul(s.data(), m.data(), s.size());
        idft_real(f.lattice.dim(), f.lattice.M(), s, c);
    }
    return out;
}

NormResult bessel_norm_via_J(const MarkedField& f, const SymbolField& sym_symbol, const NormSpec& spec) {
    check_field(f);
    if (!(spec.p > 1.0)) throw PreconditionError("norm exponent p must exceed 1");
    if (spec.r == 0.0 && f.marked()) throw PreconditionError("marked field needs a mark exponent r > 0");
    const auto J = apply_J(f, sym_symbol, spec.s);
    NormResult res;
    res.kind = "bessel_J";
    std::vector<const std::vector<double>*> ch;
    for (const auto& c : J.channels) ch.push_back(&c);
    double I = 0.0;
    for (std::size_t k = 0; k < f.lattice.size(); ++k) I += std::pow(mark_norm(J, ch, k, spec.r), spec.p);
    res.value = std::pow(I * f.lattice.cell_volume(), 1.0 / spec.p);
    // spectral energy in the outer half of the band
    const auto& g = sym_symbol.grid;
    double tot = 0.0, out = 0.0;
    for (const auto& c : f.channels) {
        const auto s = dft_real(f.lattice, c);
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double e = std::norm(s[k]);
            tot += e;
            double xi[3];
            g.frequency(k, xi);
            double mx = 0.0;
            for (int a = 0; a < g.dim(); ++a) mx = std::max(mx, std::fabs(xi[a]));
            if (mx > 0.5 * g.extent()) out += e;
        }
    }
    res.truncation_fraction = tot > 0.0 ? out / tot : 0.0;
    warn_truncation(res);
    return res;
}

std::string norm_json(const NormResult& r, const NormSpec& spec, int N) {
    nlohmann::json j;
    j["norm_kind"] = r.kind;
    j["s"] = spec.s;
    j["p"] = spec.p;
    j["q"] = spec.q == 0.0 ? spec.p : spec.q;
    j["r"] = spec.r;
    j["N"] = N;
    j["value"] = r.value;
    j["truncation_fraction"] = r.truncation_fraction;
    j["warnings"] = r.warnings;
    return j.dump();
}

EquivalenceReport norm_equivalence_check(const std::vector<MarkedField>& family, const DyadicSystem& sys,
                                         const NormSpec& spec, const SymbolField& sym_symbol) {
    if (family.empty()) throw PreconditionError("empty test family");
    EquivalenceReport rep;
    for (const auto& f : family) {
        const auto j = bessel_norm_via_J(f, sym_symbol, spec);
        if (!(j.value > 0.0)) throw PreconditionError("test function with zero norm");
        const auto h = bessel_norm(f, sys, spec);
        const auto b = besov_norm(f, sys, spec);
        rep.ratios.push_back(h.value / j.value);
        rep.besov_ratios.push_back(b.value / j.value);
        rep.max_truncation = std::max({rep.max_truncation, h.truncation_fraction, j.truncation_fraction});
    }
    const auto [lo, hi] = std::minmax_element(rep.ratios.begin(), rep.ratios.end());
    rep.min = *lo;
    rep.max = *hi;
    rep.band = rep.max / rep.min;
    const auto [blo, bhi] = std::minmax_element(rep.besov_ratios.begin(), rep.besov_ratios.end());
    rep.besov_band = *bhi / *blo;
    return rep;
}

MarkedField approximate_input(const MarkedField& phi, int n, const DyadicSystem& sys) {
    if (n < 0) throw PreconditionError("approximation index n must be nonnegative");
    check_field(phi);
    MarkedField out;
    out.lattice = phi.lattice;
    const std::size_t keep = phi.marked() ? std::min<std::size_t>(n, phi.channels.size()) : 1;
    std::vector<double> m(sys.grid().size(), 0.0);
    for (int j = 0; j <= std::min(n, sys.j_max()); ++j) {
        const auto& b = sys.block(j);
        for (std::size_t k = 0; k < m.size(); ++k) m[k] += b[k];
    }
    for (std::size_t i = 0; i < keep; ++i) {
        auto s = dft_real(phi.lattice, phi.channels[i]);
        kernels::rmul(s.data(), m.data(), s.size());
        std::vector<double> c;
        idft_real(phi.lattice.dim(), phi.lattice.M(), s, c);
        out.channels.push_back(std::move(c));
        if (phi.marked()) out.weights.push_back(phi.weights[i]);
    }
    return out;
}

std::vector<double> gaussian(const Lattice& lat, double l) {
    std::vector<double> f(lat.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double r = lat.radius(k);
        f[k] = std::exp(-M_PI * r * r / (l * l));
    }
    return f;
}

}  // namespace levy
