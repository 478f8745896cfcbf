#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace levy {

using cplx = std::complex<double>;

class Lattice;

// Frequency lattice: per-axis Nyquist extent Xi, M nodes per axis, FFT ordering
// (index k < M/2 holds k*dxi, the rest k-M), row-major with axis 0 slowest.
class FrequencyGrid {
public:
    FrequencyGrid() = default;
    FrequencyGrid(int dim, std::size_t M, double extent);

    int dim() const { return dim_; }
    std::size_t M() const { return M_; }
    double extent() const { return extent_; }
    std::size_t size() const { return size_; }
    double dxi() const { return 2.0 * extent_ / static_cast<double>(M_); }
    double spacing() const { return 0.5 / extent_; }

    double axis_frequency(std::size_t k) const;
    void frequency(std::size_t node, double* xi) const;
    double frequency_norm(std::size_t node) const;
    bool on_nyquist_shell(std::size_t node) const;
    int parity(std::size_t node) const;
    std::size_t mirror(std::size_t node) const;
    Lattice spatial() const;

    bool operator==(const FrequencyGrid& o) const {
        return dim_ == o.dim_ && M_ == o.M_ && extent_ == o.extent_;
    }

private:
    int dim_ = 0;
    std::size_t M_ = 0;
    double extent_ = 0.0;
    std::size_t size_ = 0;
};

// Spatial lattice in natural order: x_n = (n - M/2) h per axis.
class Lattice {
public:
    Lattice() = default;
    Lattice(int dim, std::size_t M, double h);

    int dim() const { return dim_; }
    std::size_t M() const { return M_; }
    double h() const { return h_; }
    std::size_t size() const { return size_; }
    double cell_volume() const;
    double period() const { return h_ * static_cast<double>(M_); }
    double axis_coordinate(std::size_t n) const {
        return (static_cast<double>(n) - static_cast<double>(M_ / 2)) * h_;
    }
    void coordinates(std::size_t node, double* x) const;
    double radius(std::size_t node) const;
    FrequencyGrid frequency_grid() const;

    bool operator==(const Lattice& o) const { return dim_ == o.dim_ && M_ == o.M_ && h_ == o.h_; }

private:
    int dim_ = 0;
    std::size_t M_ = 0;
    double h_ = 0.0;
    std::size_t size_ = 0;
};

bool is_power_of_two(std::size_t n);

// Unnormalized in-place DFTs over a dim-dimensional cube of side M.
void fft_forward(int dim, std::size_t M, cplx* data);
void fft_inverse(int dim, std::size_t M, cplx* data);

// Raw DFT of a real lattice function.
std::vector<cplx> dft_real(const Lattice& lat, const std::vector<double>& f);
// Real part of the normalized inverse DFT; returns the largest discarded imaginary part.
double idft_real(int dim, std::size_t M, std::vector<cplx>& coeffs, std::vector<double>& out);

// F^{-1}[m F f] on the lattice; m indexed on the paired frequency grid.
std::vector<double> apply_multiplier(const Lattice& lat, const std::vector<double>& f,
                                     const std::vector<cplx>& m);

// Samples of x -> \int e^{i 2 pi x.xi} E(xi) dxi on the paired spatial lattice,
// E given on the frequency grid. Returns the largest imaginary residue through imag_residue.
std::vector<double> inverse_transform(const FrequencyGrid& grid, std::vector<cplx> E,
                                      double* imag_residue = nullptr);

// Continuous-convention Fourier coefficients \int e^{-i 2 pi xi.x} f(x) dx at grid nodes.
std::vector<cplx> forward_transform(const Lattice& lat, const std::vector<double>& f);

}  // namespace levy
