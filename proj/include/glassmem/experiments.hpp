#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glassmem/cavity.hpp"
#include "glassmem/connectivity.hpp"
#include "glassmem/landscape.hpp"
#include "glassmem/memory.hpp"
#include "glassmem/stats.hpp"

// Figure-level computations. Each is a pure function of its arguments and
// base seed; `workers` changes wall-clock only.
namespace glassmem::experiments {

struct SeedRecord {
    std::string stream;
    std::uint64_t index;
    Seed128 seed;
};

// Collects the trial seeds an experiment derives, for the run manifest.
struct SeedLog {
    std::vector<SeedRecord> records;

    Seed128 derive(std::uint64_t base, const std::string& stream, std::uint64_t index);
};

Seed128 derive_logged(SeedLog* log, std::uint64_t base, const std::string& stream, std::uint64_t index);

// ---- couplings

struct CouplingLaw {
    double width = 0.0;
    stats::Histogram sampled;
    stats::Histogram exact;
    double hellinger = 0.0;
};

CouplingLaw coupling_law(double width, std::size_t pairs, std::size_t bins, std::uint64_t seed,
                         SeedLog* log = nullptr);

struct MomentCheck {
    double width = 0.0;
    stats::CouplingMonteCarlo sampled;
    stats::Moments exact{};
    double correlation = 0.0;
    double negative_fraction = 0.0;
    // |sampled - exact| / standard error, per statistic
    double z_mean = 0.0, z_std = 0.0, z_correlation = 0.0, z_negative = 0.0;
};

MomentCheck moment_check(double width, std::size_t samples, std::uint64_t seed, SeedLog* log = nullptr);

// ---- metastable counting

struct MetastableRow {
    std::size_t n = 0;
    double width = 0.0;
    double mean_count = 0.0;
    double std_count = 0.0;
    std::size_t realizations = 0;
};

std::vector<MetastableRow> metastable_grid(const std::vector<std::size_t>& sizes, const std::vector<double>& widths,
                                           std::size_t realizations, std::size_t seeds, std::uint64_t base_seed,
                                           unsigned workers, SeedLog* log = nullptr);

landscape::ScalingFit fit_metastable_rows(const std::vector<MetastableRow>& rows);

// ---- spectra

struct SpectrumCheck {
    std::vector<double> eigenvalues; // pooled over realizations, unit variance
    std::vector<double> spacings;    // pooled, unfolded
    double hellinger = 0.0;          // against the semicircle
    double ks = 0.0;                 // spacings against the Wigner surmise
};

SpectrumCheck confocal_spectrum(std::size_t n, double width, std::size_t realizations, std::uint64_t base_seed,
                                unsigned workers, SeedLog* log = nullptr);
SpectrumCheck sk_spectrum(std::size_t n, std::size_t realizations, std::uint64_t base_seed, unsigned workers,
                          SeedLog* log = nullptr);

// ---- rate kernels

struct RateRow {
    double delta_e;
    double confocal;
    double glauber;
    double metropolis;
};

// Glauber and Metropolis at T_eff, rescaled to the cavity kernel as delta_e -> 0^-.
std::vector<RateRow> tabulate_rates(const cavity::CavityParams& params, const cavity::BathSpec& bath,
                                    const std::vector<double>& grid);

struct ThermometryPoint {
    double delta_e;
    double log_ratio; // log K(delta_e) / K(-delta_e)
    double expected;  // -delta_e / T_eff
};

std::vector<ThermometryPoint> thermometry(const cavity::CavityParams& params, std::size_t points);

// ---- cavity dynamics

struct DynamicsScenario {
    connectivity::CouplingMatrix coupling; // physical units
    cavity::EnsembleState initial;
    landscape::SpinState start_minimum;    // SD minimum before the misalignment
    landscape::SpinState sd_target;        // SD fixed point of the initial sign pattern
    std::vector<Eigen::Index> misaligned;
    cavity::RateKernel kernel;
    double scale = 0.0; // physical units per unit of normalized coupling
};

struct ScenarioOptions {
    std::size_t n = 20;
    double spin = 1e3;
    double width = 1.5;
    std::size_t misaligned = 5;
    double diagonal = 1e-3; // coupling diagonal, in units of `scale`
    cavity::CavityParams params{};
};

DynamicsScenario dynamics_scenario(const ScenarioOptions& options, std::uint64_t seed);

struct DynamicsOutcome {
    cavity::Trajectory trajectory;
    cavity::EventTrace events;
    std::vector<double> energy; // along the trajectory
    std::vector<double> predicted_flip_times;
    landscape::SpinState meanfield_final;
    landscape::SpinState unravel_final;
    bool meanfield_match = false;
    bool unravel_match = false;
    bool settled = false;
    double t_settle = 0.0;
    std::size_t energy_rises = 0;    // steps where the energy went up beyond tolerance
    double max_energy_rise = 0.0;    // relative to the total energy drop
    double energy_drop = 0.0;        // E(0) - E(end)
    std::size_t sign_changes = 0;    // ensemble flips seen in the trajectory
};

struct DynamicsOptions {
    double t_max = 2000.0;        // us
    double unravel_factor = 2.0;  // unravel runs to this multiple of the settle time
    double rise_tolerance = 1e-3; // relative to the total energy drop
};

DynamicsOutcome run_dynamics(const DynamicsScenario& scenario, std::uint64_t seed,
                             const DynamicsOptions& options = {});

// ---- basins

struct BasinStats {
    double mean = 0.0;
    double std = 0.0;
    std::size_t samples = 0;
    std::vector<double> values;
};

BasinStats summarize(std::vector<double> values);

struct PseudoinverseBasins {
    double ratio = 0.0;
    BasinStats sd;
    BasinStats zero_tmh;
};

PseudoinverseBasins pseudoinverse_basins(std::size_t n, double ratio, std::size_t patterns_measured,
                                         std::size_t trials, std::uint64_t base_seed, unsigned workers,
                                         SeedLog* log = nullptr);

struct HebbianOverlap {
    double ratio = 0.0;
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> overlaps;
};

HebbianOverlap hebbian_overlap(std::size_t n, double ratio, std::size_t realizations, std::uint64_t base_seed,
                               unsigned workers, SeedLog* log = nullptr);

// Basin of pattern mu under SD when it is a fixed point of the Hebbian
// coupling, else 0.
BasinStats hebbian_basins(std::size_t n, double ratio, std::size_t patterns_measured, std::size_t trials,
                          std::uint64_t base_seed, unsigned workers, SeedLog* log = nullptr);

// Basins of randomly found minima: SD minima under SD, 0TMH minima under 0TMH.
struct MinimaBasins {
    std::size_t n = 0;
    double width = 0.0; // confocal only
    BasinStats sd;
    BasinStats zero_tmh;
};

MinimaBasins sk_basins(std::size_t n, std::size_t realizations, std::size_t seeds, std::size_t trials,
                       std::uint64_t base_seed, unsigned workers, SeedLog* log = nullptr);
MinimaBasins confocal_basins(std::size_t n, double width, std::size_t realizations, std::size_t seeds,
                             std::size_t trials, std::uint64_t base_seed, unsigned workers, SeedLog* log = nullptr);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---- chaos

struct ChaosRow {
    std::size_t n = 0;
    double width = 0.0;
    double mean_overlap = 0.0;
    double std_overlap = 0.0;
    double mean_weight_change = 0.0;
    double std_weight_change = 0.0;
    std::size_t samples = 0;
};

ChaosRow chaos_point(std::size_t n, double width, std::size_t realizations, std::size_t trials,
                     const memory::NoiseModel& noise, std::uint64_t base_seed, unsigned workers,
                     SeedLog* log = nullptr);

} // namespace glassmem::experiments
