#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levy/densities.hpp"
#include "levy/solver.hpp"
#include "levy/symbols.hpp"

namespace levy {

// <base>.bin holds little-endian 8-byte reals in row-major order; <base>.json holds
// {"format", "dtype", "shape", "hash", "meta"} with hash = FNV-1a of the .bin bytes.
struct StoredArray {
    std::string dtype = "f64";  // "f64" or "c128" (interleaved re, im)
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::string meta;  // JSON object text
    std::uint64_t hash = 0;
};

std::uint64_t payload_hash(const std::vector<double>& data);
void write_array(const std::string& base, const StoredArray& a);
// throws ConfigError on a missing file, a shape mismatch or a hash mismatch
StoredArray read_array(const std::string& base);

void save_density(const std::string& base, const DensityField& d);
DensityField load_density(const std::string& base);

void save_solution(const std::string& base, const SolutionField& s, std::uint64_t measure_hash = 0, std::uint64_t seed = 0);
SolutionField load_solution(const std::string& base);

void save_symbol(const std::string& base, const SymbolField& s);
SymbolField load_symbol(const std::string& base);

// radius,value over the nodes of the first axis with x >= 0
void write_density_profile_csv(const std::string& path, const DensityField& d);

// "%.17g"; the text form used for every CSV number so that artifacts are reproducible
std::string csv_number(double v);

}  // namespace levy
