#include "levy/special.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>

#include "levy/error.hpp"

namespace levy {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double series_limit = 4.0;
constexpr double asymptotic_limit = 40.0;

GaussRule build_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) {
                r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
                break;
            }
            r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        r.x[i] = x;
    }
    return r;
}

// \int_X^\infty e^{iv} v^{-gamma} dv by its asymptotic series; accurate for X >= 40.
std::complex<double> oscillatory_tail(double X, double gamma) {
    std::complex<double> sum = 0.0;
    std::complex<double> phase = 1.0;
    const std::complex<double> minus_i(0.0, -1.0);
    double term = 1.0;
    for (int n = 0; n < 200; ++n) {
        sum += phase * term;
        const double next = term * (gamma + n) / X;
        if (next > term || next < 1e-18) break;
        term = next;
        phase *= minus_i;
    }
    return std::complex<double>(0.0, 1.0) * std::exp(std::complex<double>(0.0, X)) * std::pow(X, -gamma) * sum;
}

double cos_series(double A, double B, double beta) {
    double sum = 0.0, fact = 1.0;
    for (int n = 1; n < 80; ++n) {
        fact *= (2.0 * n - 1.0) * (2.0 * n);
        const double m = 2.0 * n - beta;
        double in;
        if (std::fabs(m) < 1e-13) in = std::log(B / A);
        else in = (std::pow(B, m) - (A > 0.0 ? std::pow(A, m) : 0.0)) / m;
        const double term = in / fact;
        sum += (n % 2 == 1) ? term : -term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum) && n > 2) break;
    }
    return sum;
}

double sin_series(double A, double B, double beta, bool compensated) {
    double sum = 0.0, fact = 1.0;
    for (int n = 0; n < 80; ++n) {
        if (n > 0) fact *= (2.0 * n) * (2.0 * n + 1.0);
        if (compensated && n == 0) continue;
        const double m = 2.0 * n + 1.0 - beta;
        double in;
        if (std::fabs(m) < 1e-13) in = std::log(B / A);
        else in = (std::pow(B, m) - (A > 0.0 ? std::pow(A, m) : 0.0)) / m;
        const double term = in / fact;
        sum += (n % 2 == 0) ? term : -term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum) && n > 2) break;
    }
    return sum;
}

double mid_composite(double lo, double hi, const std::function<double(double)>& f) {
    const int panels = std::max(1, static_cast<int>(std::ceil(hi - lo)));
    return integrate_panels(f, lo, hi, panels, 10);
}

// \int_0^\infty (1 - cos v) v^{-1-beta} dv, beta in (0, 2)
double cos_total(double beta) {
    const double e = 1.0 - beta;
    const double s = std::fabs(e) < 1e-12 ? M_PI / 2.0 : std::sin(M_PI * e / 2.0) / e;
    return std::tgamma(2.0 - beta) * s / beta;
}

// \int_0^\infty (sin v - c v) v^{-1-beta} dv for beta in (0,1) (c=0) or (1,2) (c=1)
double sin_total(double beta) {
    if (std::fabs(beta) < 1e-12) return M_PI / 2.0;
    return std::tgamma(1.0 - beta) * std::sin(M_PI * beta / 2.0) / beta;
}

double cos_gap_raw(double A, double B, double beta) {
    double total = 0.0;
    if (A < series_limit) total += cos_series(A, std::min(B, series_limit), beta);
    if (B > series_limit && A < asymptotic_limit) {
        total += mid_composite(std::max(A, series_limit), std::min(B, asymptotic_limit),
                               [beta](double v) { return (1.0 - std::cos(v)) * std::pow(v, -1.0 - beta); });
    }
    if (B > asymptotic_limit) {
        const double lo = std::max(A, asymptotic_limit);
        std::complex<double> g = oscillatory_tail(lo, 1.0 + beta);
        if (std::isfinite(B)) g -= oscillatory_tail(B, 1.0 + beta);
        total += power_integral(lo, B, beta) - g.real();
    }
    return total;
}

double sin_gap_raw(double A, double B, double beta, bool compensated) {
    const double c = compensated ? 1.0 : 0.0;
    double total = 0.0;
    if (A < series_limit) total += sin_series(A, std::min(B, series_limit), beta, compensated);
    if (B > series_limit && A < asymptotic_limit) {
        const double lo = std::max(A, series_limit), hi = std::min(B, asymptotic_limit);
        total += mid_composite(lo, hi, [beta](double v) { return std::sin(v) * std::pow(v, -1.0 - beta); });
        if (compensated) total -= power_integral(lo, hi, beta - 1.0);
    }
    if (B > asymptotic_limit) {
        const double lo = std::max(A, asymptotic_limit);
        std::complex<double> g = oscillatory_tail(lo, 1.0 + beta);
        if (std::isfinite(B)) g -= oscillatory_tail(B, 1.0 + beta);
        total += g.imag();
        if (compensated) total -= c * power_integral(lo, B, beta - 1.0);
    }
    return total;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

double power_integral(double a, double b, double gamma) {
    if (!(b > a)) return 0.0;
    if (std::fabs(gamma) < 1e-14) {
        if (a == 0.0 || !std::isfinite(b)) return inf;
        return std::log(b / a);
    }
    if (a == 0.0) {
        if (gamma > 0.0) return inf;
        return std::isfinite(b) ? std::pow(b, -gamma) / (-gamma) : inf;
    }
    if (!std::isfinite(b)) {
        if (gamma < 0.0) return inf;
        return std::pow(a, -gamma) / gamma;
    }
    return std::pow(a, -gamma) * (-std::expm1(-gamma * std::log(b / a))) / gamma;
}

double cosine_total(double beta) { return cos_total(beta); }

double cosine_gap_integral(double A, double B, double beta) {
    if (!(B > A)) return 0.0;
    if (A == 0.0 && !(beta < 2.0)) return inf;
    if (!std::isfinite(B) && !(beta > 0.0)) return inf;
    const bool total_known = beta > 0.0 && beta < 2.0;
    if (total_known && A == 0.0 && B > series_limit) {
        if (!std::isfinite(B)) return cos_total(beta);
        return cos_total(beta) - cos_gap_raw(B, inf, beta);
    }
    if (total_known && !std::isfinite(B) && A < series_limit) {
        return cos_total(beta) - cos_series(0.0, A, beta);
    }
    return cos_gap_raw(A, B, beta);
}

double sine_gap_integral(double A, double B, double beta, bool compensated) {
    if (!(B > A)) return 0.0;
    if (A == 0.0) {
        if (compensated ? !(beta < 2.0) : !(beta < 1.0)) return inf;
    }
    if (!std::isfinite(B) && compensated && !(beta > 1.0)) return inf;
    const bool total_known = compensated ? (beta > 1.0 && beta < 2.0) : (beta > -1.0 && beta < 1.0);
    if (total_known && A == 0.0 && B > series_limit) {
        if (!std::isfinite(B)) return sin_total(beta);
        return sin_total(beta) - sin_gap_raw(B, inf, beta, compensated);
    }
    if (total_known && !std::isfinite(B) && A < series_limit) {
        return sin_total(beta) - sin_series(0.0, A, beta, compensated);
    }
    return sin_gap_raw(A, B, beta, compensated);
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels, int order) {
    const GaussRule& g = gauss_legendre(order);
    const double len = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * len, half = 0.5 * len;
        double ps = 0.0;
        for (int i = 0; i < order; ++i) ps += g.w[i] * f(mid + half * g.x[i]);
        sum += ps * half;
    }
    return sum;
}

LogIntegral integrate_log(const std::function<double(double)>& f, double x_lo, double x_hi,
                          double panels_per_unit, double rel_tol, int max_panels) {
    LogIntegral out;
    auto g = [&f](double u) {
        const double x = std::exp(u);
        return f(x) * x;
    };
    const double step = 1.0 / panels_per_unit;
    const bool open_lo = x_lo <= 0.0, open_hi = !std::isfinite(x_hi);
    double u_lo = open_lo ? 0.0 : std::log(x_lo);
    double u_hi = open_hi ? 0.0 : std::log(x_hi);
    if (open_lo && !open_hi) u_lo = u_hi;
    if (open_hi && !open_lo) u_hi = u_lo;
    if (!open_lo && !open_hi && u_hi > u_lo) {
        const int n = std::max(1, static_cast<int>(std::ceil((u_hi - u_lo) / step)));
        out.value = integrate_panels(g, u_lo, u_hi, n, 10);
        out.panels = n;
    }
    auto extend = [&](double start, double dir) {
        int quiet = 0;
        double u = start;
        while (out.panels < max_panels) {
            const double a = dir > 0 ? u : u - step, b = dir > 0 ? u + step : u;
            const double v = integrate_panels(g, a, b, 1, 10);
            out.value += v;
            ++out.panels;
            u += dir * step;
            if (std::fabs(v) <= rel_tol * std::fabs(out.value)) {
                if (++quiet >= 3) return;
            } else {
                quiet = 0;
            }
        }
        out.converged = false;
    };
    if (open_lo) extend(u_lo, -1.0);
    if (open_hi) extend(u_hi, 1.0);
    return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(a + (b - a) * static_cast<double>(i) / (n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

}  // namespace levy
