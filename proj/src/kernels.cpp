#include "levy/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace levy::kernels {

#if !(defined(__x86_64__) || defined(_M_X64))
const Table* avx2_table() { return nullptr; }
#endif
#if !(defined(__aarch64__) || defined(_M_ARM64))
const Table* neon_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table* table_for(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return &scalar_table();
        case Isa::Avx2: return cpu_has_avx2() ? avx2_table() : nullptr;
        case Isa::Neon: return neon_table();
    }
    return nullptr;
}

Isa detect() {
    const char* env = std::getenv("LEVY_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (table_for(Isa::Avx2)) return Isa::Avx2;
    if (table_for(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
}

std::atomic<int> current{-1};

}  // namespace

Isa active_isa() {
    int c = current.load(std::memory_order_acquire);
    if (c < 0) {
        c = static_cast<int>(detect());
        current.store(c, std::memory_order_release);
    }
    return static_cast<Isa>(c);
}

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

bool select_isa(Isa isa) {
    if (!table_for(isa)) return false;
    current.store(static_cast<int>(isa), std::memory_order_release);
    return true;
}

const Table& active() { return *table_for(active_isa()); }

double sum_abs_pow(const double* x, std::size_t n, double p) {
    if (p == 1.0) return sum_abs(x, n);
    if (p == 2.0) return sum_sq(x, n);
    if (p == 4.0) return active().sum_pow4(x, n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::pow(std::fabs(x[i]), p);
    return s;
}

}  // namespace levy::kernels
