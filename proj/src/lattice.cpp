#include "levy/lattice.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "levy/error.hpp"
#include "levy/kernels.hpp"

namespace levy {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

static std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

FrequencyGrid::FrequencyGrid(int dim, std::size_t M, double extent)
    : dim_(dim), M_(M), extent_(extent) {
    if (dim < 1 || dim > 3) throw ConfigError("grid.dim must be 1, 2 or 3");
    if (!is_power_of_two(M)) throw ConfigError("grid.M must be a power of two");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("grid.extent must be positive");
    size_ = ipow(M, dim);
}

double FrequencyGrid::axis_frequency(std::size_t k) const {
    long kk = k < M_ / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(M_);
    return static_cast<double>(kk) * dxi();
}

void FrequencyGrid::frequency(std::size_t node, double* xi) const {
    for (int a = dim_ - 1; a >= 0; --a) {
        xi[a] = axis_frequency(node % M_);
        node /= M_;
    }
}

double FrequencyGrid::frequency_norm(std::size_t node) const {
    double xi[3];
    frequency(node, xi);
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += xi[a] * xi[a];
    return std::sqrt(s);
}

bool FrequencyGrid::on_nyquist_shell(std::size_t node) const {
    for (int a = 0; a < dim_; ++a) {
        if (node % M_ == M_ / 2) return true;
        node /= M_;
    }
    return false;
}

int FrequencyGrid::parity(std::size_t node) const {
    std::size_t s = 0;
    for (int a = 0; a < dim_; ++a) {
        s += node % M_;
        node /= M_;
    }
    return (s & 1) ? -1 : 1;
}

std::size_t FrequencyGrid::mirror(std::size_t node) const {
    std::size_t out = 0, mul = 1;
    for (int a = 0; a < dim_; ++a) {
        std::size_t k = node % M_;
        node /= M_;
        out += ((M_ - k) % M_) * mul;
        mul *= M_;
    }
    return out;
}

Lattice FrequencyGrid::spatial() const { return Lattice(dim_, M_, spacing()); }

Lattice::Lattice(int dim, std::size_t M, double h) : dim_(dim), M_(M), h_(h) {
    if (dim < 1 || dim > 3) throw ConfigError("lattice dim must be 1, 2 or 3");
    if (!is_power_of_two(M)) throw ConfigError("lattice size must be a power of two");
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("lattice spacing must be positive");
    size_ = ipow(M, dim);
}

double Lattice::cell_volume() const { return std::pow(h_, dim_); }

void Lattice::coordinates(std::size_t node, double* x) const {
    for (int a = dim_ - 1; a >= 0; --a) {
        x[a] = axis_coordinate(node % M_);
        node /= M_;
    }
}

double Lattice::radius(std::size_t node) const {
    double x[3];
    coordinates(node, x);
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += x[a] * x[a];
    return std::sqrt(s);
}

FrequencyGrid Lattice::frequency_grid() const { return FrequencyGrid(dim_, M_, 0.5 / h_); }

namespace {

std::mutex plan_mutex;
std::map<std::tuple<int, std::size_t, int>, fftw_plan> plan_cache;

fftw_plan get_plan(int dim, std::size_t M, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_tuple(dim, M, sign);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;
    int n[3] = {static_cast<int>(M), static_cast<int>(M), static_cast<int>(M)};
    std::size_t total = ipow(M, dim);
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    fftw_plan p = fftw_plan_dft(dim, n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw NumericalError("FFTW planner failed");
    plan_cache.emplace(key, p);
    return p;
}

}  // namespace

void fft_forward(int dim, std::size_t M, cplx* data) {
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(get_plan(dim, M, FFTW_FORWARD), d, d);
}

void fft_inverse(int dim, std::size_t M, cplx* data) {
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(get_plan(dim, M, FFTW_BACKWARD), d, d);
}

std::vector<cplx> dft_real(const Lattice& lat, const std::vector<double>& f) {
    if (f.size() != lat.size()) throw PreconditionError("lattice function size mismatch");
    std::vector<cplx> c(f.begin(), f.end());
    fft_forward(lat.dim(), lat.M(), c.data());
    return c;
}

double idft_real(int dim, std::size_t M, std::vector<cplx>& coeffs, std::vector<double>& out) {
    fft_inverse(dim, M, coeffs.data());
    const double scale = 1.0 / static_cast<double>(coeffs.size());
    out.resize(coeffs.size());
    return kernels::real_part_scaled(coeffs.data(), out.data(), coeffs.size(), scale);
}

std::vector<double> apply_multiplier(const Lattice& lat, const std::vector<double>& f,
                                     const std::vector<cplx>& m) {
    if (m.size() != lat.size()) throw PreconditionError("multiplier size mismatch");
    auto c = dft_real(lat, f);
    kernels::cmul(c.data(), m.data(), c.size());
    std::vector<double> out;
    idft_real(lat.dim(), lat.M(), c, out);
    return out;
}

std::vector<double> inverse_transform(const FrequencyGrid& grid, std::vector<cplx> E,
                                      double* imag_residue) {
    if (E.size() != grid.size()) throw PreconditionError("spectrum size mismatch");
    for (std::size_t k = 0; k < E.size(); ++k)
        if (grid.parity(k) < 0) E[k] = -E[k];
    fft_inverse(grid.dim(), grid.M(), E.data());
    const double scale = std::pow(grid.dxi(), grid.dim());
    std::vector<double> out(E.size());
    double res = kernels::real_part_scaled(E.data(), out.data(), E.size(), scale);
    if (imag_residue) *imag_residue = res;
    return out;
}

std::vector<cplx> forward_transform(const Lattice& lat, const std::vector<double>& f) {
    auto c = dft_real(lat, f);
    const FrequencyGrid grid = lat.frequency_grid();
    const double vol = lat.cell_volume();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= vol * grid.parity(k);
    return c;
}

}  // namespace levy
