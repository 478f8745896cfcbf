#pragma once

#include <array>
#include <cstdint>

namespace levy {

// Philox4x32-10 counter-based generator. A stream is addressed by
// (seed, replica, purpose); draws advance a 64-bit block counter.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t replica, std::uint32_t purpose);

    std::uint64_t next_u64();
    double uniform();        // in (0, 1)
    double normal();
    double exponential();    // unit rate
    std::uint64_t poisson(double mean);
    std::size_t categorical(const double* cumulative, std::size_t n);

    // Independent child stream (used for split-stream seeding).
    Stream split(std::uint32_t child) const;

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t replica_;
    std::uint32_t purpose_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

namespace purpose {
constexpr std::uint32_t levy_path = 1;
constexpr std::uint32_t poisson_measure = 2;
constexpr std::uint32_t inverse_cdf = 3;
constexpr std::uint32_t inputs = 4;
constexpr std::uint32_t samples = 5;
constexpr std::uint32_t brownian = 6;
}  // namespace purpose

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

}  // namespace levy
