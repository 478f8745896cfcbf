#include "levy/rng.hpp"

#include <cmath>

namespace levy {

namespace {

constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += W0;
        k[1] += W1;
    }
    return c;
}

Stream::Stream(std::uint64_t seed, std::uint64_t replica, std::uint32_t purpose)
    : replica_(replica), purpose_(purpose) {
    std::uint64_t s = seed;
    const std::uint64_t k = splitmix(s);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void Stream::refill() {
    // counter words: block (low 32 bits), block high bits mixed with purpose, replica
    const std::uint32_t b0 = static_cast<std::uint32_t>(block_);
    const std::uint32_t b1 = static_cast<std::uint32_t>(block_ >> 32) ^ (purpose_ << 16);
    buf_ = philox4x32({b0, b1, static_cast<std::uint32_t>(replica_), static_cast<std::uint32_t>(replica_ >> 32)}, key_);
    ++block_;
    pos_ = 0;
}

std::uint64_t Stream::next_u64() {
    if (pos_ > 2) refill();
    const std::uint64_t v = (static_cast<std::uint64_t>(buf_[pos_]) << 32) | buf_[pos_ + 1];
    pos_ += 2;
    return v;
}

double Stream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u = uniform(), v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 2.0 * M_PI * v;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double Stream::exponential() { return -std::log(uniform()); }

std::uint64_t Stream::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    std::uint64_t total = 0;
    // Additivity keeps each inversion chunk small enough for exp(-chunk) to stay accurate.
    const int chunks = static_cast<int>(std::ceil(mean / 20.0));
    const double m = mean / chunks;
    for (int c = 0; c < chunks; ++c) {
        double p = std::exp(-m), cdf = p, u = uniform();
        std::uint64_t k = 0;
        while (u > cdf && k < 1000) {
            ++k;
            p *= m / static_cast<double>(k);
            cdf += p;
        }
        total += k;
    }
    return total;
}

std::size_t Stream::categorical(const double* cumulative, std::size_t n) {
    const double u = uniform() * cumulative[n - 1];
    std::size_t lo = 0, hi = n - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cumulative[mid] < u) lo = mid + 1; else hi = mid;
    }
    return lo;
}

Stream Stream::split(std::uint32_t child) const {
    Stream s(0, replica_, purpose_);
    std::uint64_t mix = (static_cast<std::uint64_t>(key_[1]) << 32 | key_[0]) ^ (0xA24BAED4963EE407ull * (child + 1));
    const std::uint64_t k = splitmix(mix);
    s.key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    return s;
}

}  // namespace levy
