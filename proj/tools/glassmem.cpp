// glassmem <experiment> --config <path> [--seed S] [--workers K] [--out DIR]
//
// Exit status: 0 success, 2 configuration error, 3 runtime error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "glassmem/config.hpp"
#include "glassmem/errors.hpp"
#include "glassmem/harness.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::string experiment_list()
{
    std::string s;
    for (const auto& e : glassmem::config::experiment_names()) s += (s.empty() ? "" : ", ") + e;
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Confocal-cavity spin-glass and associative-memory experiments"};
    app.set_version_flag("--version", glassmem::harness::code_version());

    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
    bool print_config = false;

    app.add_option("experiment", experiment, "one of: " + experiment_list())->required();
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 4096u));
    app.add_option("--out", out, "output directory");
    app.add_flag("--print-config", print_config, "print the effective configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    glassmem::config::ExperimentConfig cfg;
    try {
        if (!glassmem::config::is_experiment(experiment))
            throw glassmem::ConfigError("unknown experiment '" + experiment + "' (expected " + experiment_list() + ")");
        if (config_path.empty() && !print_config) throw glassmem::ConfigError("--config is required");
        cfg = config_path.empty() ? glassmem::config::default_config(experiment)
                                  : glassmem::config::load_config(config_path, experiment);
        if (seed) cfg.seed = *seed;
        if (workers) cfg.workers = *workers;
        if (out) cfg.output = *out;
        if (print_config) {
            std::cout << glassmem::config::to_json(cfg) << '\n';
            return 0;
        }
        const auto problems = glassmem::config::validate(cfg);
        if (!problems.empty()) {
            std::cerr << "glassmem: invalid config\n";
            for (const auto& p : problems) std::cerr << "  " << p << '\n';
            return kConfigError;
        }
    } catch (const glassmem::Error& e) {
        std::cerr << "glassmem: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        const auto manifest = glassmem::harness::run(cfg);
        std::cout << manifest.experiment << ": " << manifest.outputs.size() << " files in " << cfg.output << " ("
                  << manifest.wall_clock_s << " s)\n";
    } catch (const glassmem::ConfigError& e) {
        std::cerr << "glassmem: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "glassmem: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}
