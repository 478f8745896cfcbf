#pragma once

#include <functional>
#include <vector>

namespace levy {

struct GaussRule {
    std::vector<double> x;  // nodes on (-1, 1)
    std::vector<double> w;
};

const GaussRule& gauss_legendre(int n);

// \int_a^b r^{-1-gamma} dr for 0 <= a < b <= inf; +inf when divergent.
double power_integral(double a, double b, double gamma);

// \int_0^inf (1 - cos v) v^{-1-beta} dv for beta in (0, 2)
double cosine_total(double beta);
// \int_A^B (1 - cos v) v^{-1-beta} dv, 0 <= A < B <= inf.
double cosine_gap_integral(double A, double B, double beta);
// \int_A^B (sin v - c v) v^{-1-beta} dv with c = 1 when compensated, else 0.
double sine_gap_integral(double A, double B, double beta, bool compensated);

// Composite Gauss-Legendre on [a, b] with the given number of equal panels.
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels, int order = 10);

// \int_{x_lo}^{x_hi} f(x) dx in the variable u = log x; x_lo may be 0 and x_hi infinite,
// in which case panels are added until their contribution is below rel_tol of the total.
struct LogIntegral {
    double value = 0.0;
    int panels = 0;
    bool converged = true;
};
LogIntegral integrate_log(const std::function<double(double)>& f, double x_lo, double x_hi,
                          double panels_per_unit = 1.0, double rel_tol = 1e-14, int max_panels = 4000);

std::vector<double> logspace(double lo, double hi, std::size_t n);

}  // namespace levy
