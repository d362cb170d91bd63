#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glassmem/cavity.hpp"
#include "glassmem/landscape.hpp"
#include "glassmem/memory.hpp"

// Experiment configuration: a JSON document whose keys mirror the structs
// below. Frequencies are given in MHz (converted to rad/us on use). Missing
// keys keep the experiment's defaults; unknown keys are errors.
namespace glassmem::config {

const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

struct Grid {
    std::vector<std::size_t> sizes;
    std::vector<double> widths;
    std::vector<double> ratios;

    bool operator==(const Grid&) const = default;
};

struct Trials {
    std::size_t realizations = 1; // coupling draws per grid point
    std::size_t seeds = 1;        // random starting states per coupling
    std::size_t per_distance = 100;
    std::size_t samples = 1;      // Monte Carlo samples (couplings) or patterns measured
    std::size_t bins = 100;

    bool operator==(const Trials&) const = default;
};

struct Dynamics {
    std::string kind = "sd"; // sd | 0tmh | metropolis | glauber
    double temperature = 1.0;

    bool operator==(const Dynamics&) const = default;
};

struct Cavity {
    double omega_z_mhz = 1.0;
    double delta_c_mhz = -3.0;
    double kappa_mhz = 0.15;
    double j_ii_mhz = 0.3;

    cavity::CavityParams params() const;
    bool operator==(const Cavity&) const = default;
};

struct Bath {
    std::string kind = "none"; // none | classical | quantum
    double alpha = 20.0;
    double alpha_q = 2.0;
    double omega_c_mhz = 0.004;

    cavity::BathSpec spec() const;
    bool operator==(const Bath&) const = default;
};

struct Noise {
    double position_sigma_um = 1.0;
    double w0_um = 35.0;
    double total_atoms = 1e6;

    memory::NoiseModel model(std::size_t n) const;
    bool operator==(const Noise&) const = default;
};

struct Memory {
    double width = 1.5;
    double lambda_per_n = 1e-3;
    std::size_t seed_factor = 20;

    bool operator==(const Memory&) const = default;
};

struct Scenario {
    std::size_t n = 20;
    double spin = 1e3;
    double width = 1.5;
    std::size_t misaligned = 5;
    double diagonal = 1e-3;
    double t_max_us = 2000.0;
    double rise_tolerance = 1e-3;

    bool operator==(const Scenario&) const = default;
};

struct Spectrum {
    std::size_t n = 1000;
    double width = 12.0;
    std::size_t collapse_trials = 2; // realizations per (N, w) in the collapse grid
    std::vector<double> nus{-3.0, -4.0, -5.0};

    bool operator==(const Spectrum&) const = default;
};

struct Rates {
    double min_mhz = -12.0;
    double max_mhz = 6.0;
    std::size_t points = 361;
    std::size_t thermometry_points = 50;

    std::vector<double> grid() const; // rad/us
    bool operator==(const Rates&) const = default;
};

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string output = "out";

    Grid grid;
    Trials trials;
    Dynamics dynamics;
    Cavity cavity;
    Bath bath;
    Noise noise;
    Memory memory;
    Scenario scenario;
    Spectrum spectrum;
    Rates rates;

    bool operator==(const ExperimentConfig&) const = default;
};

// Desk-scale defaults for one experiment. Throws ConfigError for unknown names.
ExperimentConfig default_config(const std::string& experiment);

// Overlays `text` on the defaults of the experiment it names (or `experiment`
// if the document has no "experiment" key). Throws ConfigError on bad JSON,
// unknown keys, wrong types, or a name mismatch.
ExperimentConfig parse_config(const std::string& text, const std::string& experiment = "");
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& experiment = "");

// Full document, every key present.
std::string to_json(const ExperimentConfig& config, int indent = 2);

// Static checks; empty when the config is runnable.
std::vector<std::string> validate(const ExperimentConfig& config);

landscape::DynamicsKind dynamics_kind(const Dynamics& d);

} // namespace glassmem::config
