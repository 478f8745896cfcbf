#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace levy::cli {

inline constexpr const char* version = "1.0.0";

const std::vector<std::string>& subcommands();
const std::vector<std::string>& check_ops();

// key.path=value; value is parsed as JSON when possible, otherwise kept as a string.
// Numeric path segments index into arrays.
void apply_override(nlohmann::json& cfg, const std::string& assignment);

struct Artifact {
    std::string path;  // relative to the output directory
    std::uint64_t hash = 0;
    std::uintmax_t bytes = 0;
};

struct RunResult {
    std::vector<Artifact> artifacts;
    std::vector<std::string> failed_checks;
};

class Experiment {
public:
    // throws ConfigError naming the offending field
    static Experiment load(const std::string& config_path, const std::vector<std::string>& overrides = {},
                           std::optional<std::uint64_t> seed = std::nullopt);
    static Experiment from_json(nlohmann::json cfg, const std::string& base_dir = ".");

    const nlohmann::json& config() const { return cfg_; }
    std::string config_hash() const;

    // writes the artifacts and manifest_<subcommand>.json into out_dir (empty: output.directory);
    // failed verification checks are reported in the result, not thrown
    RunResult run(const std::string& subcommand, const std::string& out_dir = "") const;

private:
    void validate() const;
    nlohmann::json cfg_;
    std::string base_dir_;
};

}  // namespace levy::cli
