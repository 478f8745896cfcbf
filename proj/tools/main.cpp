#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "levy/error.hpp"
#include "levy/parallel.hpp"

namespace {

struct Args {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets, positional;
    int jobs = 1;
};

void add_common(CLI::App* s, Args& a) {
    s->add_option("--config", a.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--seed", a.seed, "master seed, overrides the config");
    s->add_option("--out", a.out, "output directory, overrides output.directory");
    s->add_option("--set", a.sets, "override a config value: dotted.key=value (repeatable)");
    s->add_option("--jobs", a.jobs, "worker threads")->check(CLI::Range(1, 1024));
    s->add_option("overrides", a.positional, "further key=value overrides");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy-type operators: measures, symbols, densities, function spaces, SPDE solver, estimate checks"};
    app.set_version_flag("--version", levy::cli::version);
    app.require_subcommand(1);
    Args a;
    for (const auto& name : levy::cli::subcommands()) add_common(app.add_subcommand(name, "run " + name), a);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        levy::set_jobs(a.jobs);
        auto overrides = a.sets;
        overrides.insert(overrides.end(), a.positional.begin(), a.positional.end());
        const auto exp = levy::cli::Experiment::load(a.config, overrides, a.seed);
        const auto res = exp.run(sub, a.out);
        for (const auto& art : res.artifacts) std::cout << art.path << "\n";
        if (!res.failed_checks.empty()) {
            for (const auto& f : res.failed_checks) std::cerr << "check failed: " << f << "\n";
            return 3;
        }
        return 0;
    } catch (const levy::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const levy::PreconditionError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const levy::VerificationFailure& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return 3;
    } catch (const levy::UnderResolvedError& e) {
        std::cerr << "numerical error: " << e.what() << " (required extent " << e.required_extent() << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
}
