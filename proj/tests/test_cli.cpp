#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "experiment.hpp"
#include "json.hpp"
#include "levy/error.hpp"

using namespace levy;
using nlohmann::json;

namespace {

json base() {
    return json::parse(R"({"measure": {"kind": "stable", "dim": 1, "sigma": 1.0},
                           "grid": {"dim": 1, "M": 256, "extent": 8}, "seed": 3})");
}

std::string error_of(const json& cfg) {
    try {
        cli::Experiment::from_json(cfg);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("overrides") {
    json c = base();
    cli::apply_override(c, "grid.M=512");
    CHECK(c["grid"]["M"] == 512);
    cli::apply_override(c, "output.directory=out/x");
    CHECK(c["output"]["directory"] == "out/x");
    cli::apply_override(c, "checks=[{\"op\":\"apriori\",\"p\":[2]}]");
    cli::apply_override(c, "checks.0.p=[2,4]");
    CHECK(c["checks"][0]["p"] == json::array({2, 4}));
    CHECK_THROWS_AS(cli::apply_override(c, "checks.3.p=1"), ConfigError);
    CHECK_THROWS_AS(cli::apply_override(c, "grid.M.x=1"), ConfigError);
    CHECK_THROWS_AS(cli::apply_override(c, "novalue"), ConfigError);
}

TEST_CASE("validation names the field") {
    CHECK(error_of(base()).empty());
    auto c = base();
    c["grid"]["M"] = 100;
    CHECK(error_of(c).find("grid.M") == 0);
    c = base();
    c["grid"]["dim"] = 2;
    CHECK(error_of(c).find("grid.dim") == 0);
    c = base();
    c["dyadic"] = {{"N", 1}};
    CHECK(error_of(c).find("dyadic.N") == 0);
    c = base();
    c["solver"] = {{"marks", 9}};
    CHECK(error_of(c).find("solver.marks") == 0);
    c = base();
    c["seed"] = -4;
    CHECK(error_of(c).find("seed") == 0);
    c = base();
    c["checks"] = json::array({{{"op", "bogus"}}});
    CHECK(error_of(c).find("checks[0].op") == 0);
    c = base();
    c["colour"] = "red";
    CHECK(error_of(c).find("colour") == 0);
    c = base();
    c["measure"]["sigma"] = "one";
    CHECK(error_of(c).find("measure.sigma") == 0);
    c = base();
    c.erase("measure");
    CHECK(error_of(c).find("measure") == 0);
}

TEST_CASE("seed is required by stochastic subcommands") {
    auto c = base();
    c.erase("seed");
    const auto e = cli::Experiment::from_json(c);
    const auto dir = (std::filesystem::temp_directory_path() / "levy_cli_test").string();
    CHECK_THROWS_WITH_AS(e.run("simulate", dir), doctest::Contains("seed"), ConfigError);
    CHECK_NOTHROW(e.run("symbol", dir));
    CHECK_THROWS_AS(e.run("verify", dir), ConfigError);
    CHECK_THROWS_AS(e.run("plot", dir), ConfigError);
}

TEST_CASE("manifest lists artifacts with hashes") {
    const auto e = cli::Experiment::from_json(base());
    const auto dir = std::filesystem::temp_directory_path() / "levy_cli_manifest";
    std::filesystem::remove_all(dir);
    const auto r = e.run("analyze-measure", dir.string());
    CHECK(r.failed_checks.empty());
    REQUIRE(r.artifacts.size() == 4);
    const auto m = json::parse(std::ifstream(dir / "manifest_analyze-measure.json"));
    CHECK(m["config_hash"] == e.config_hash());
    CHECK(m["seed"] == 3);
    CHECK(m["artifacts"].size() == 4);
    for (const auto& a : m["artifacts"]) {
        CHECK(std::filesystem::file_size(dir / a["path"].get<std::string>()) == a["bytes"].get<std::uintmax_t>());
        CHECK(a["hash"].get<std::string>().size() == 16);
    }
    CHECK(m["versions"].contains("fftw"));
}

}  // TEST_SUITE
