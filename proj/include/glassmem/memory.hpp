#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "glassmem/connectivity.hpp"
#include "glassmem/landscape.hpp"
#include "glassmem/random.hpp"

namespace glassmem::memory {

using connectivity::ConfocalParams;
using connectivity::CouplingMatrix;
using connectivity::EnsembleLayout;
using connectivity::PatternSet;
using landscape::DynamicsKind;
using landscape::ExternalField;
using landscape::SpinState;

std::size_t hamming(const SpinState& a, const SpinState& b);

// sign with sign(0) = +1
SpinState sign_state(const Eigen::VectorXd& v);

inline constexpr double kRecallThreshold = 0.95;

struct RecallReport {
    std::vector<std::size_t> distances;
    std::vector<std::size_t> trials;
    std::vector<std::size_t> successes;
    std::vector<double> probabilities;
    std::size_t basin_size = 0;
    std::size_t trials_per_d = 0;
};

struct RecallOptions {
    std::size_t trials = 100;
    // Stop at the first d below the threshold, and stop sampling a d once its
    // failures already rule out the threshold. The basin size is unchanged.
    bool early_stop = false;
};

// Recovery probability after flipping d random spins, d = 0..max_d.
// Recovery is an exact match with the attractor.
RecallReport recall_curve(const SpinState& attractor, const CouplingMatrix& coupling, const ExternalField& field,
                          const DynamicsKind& kind, std::size_t max_d, Rng& rng, const RecallOptions& options = {});

// Largest d with p(d) >= 0.95 before the first crossing below it.
std::size_t basin_from_probabilities(const std::vector<double>& probabilities);

inline double default_lambda(Eigen::Index n) { return 1e-3 * static_cast<double>(n); }

struct Codec {
    Eigen::MatrixXd encoder;
    Eigen::MatrixXd decoder;
    double lambda = 0.0;
    PatternSet patterns;
    std::vector<SpinState> catalog; // catalog[p] is the image of pattern p
    double margin = 0.0;            // min |(M xi^p)_i| over stored pairs
    // Catalog states whose decoding misses their pattern. Nonzero when the
    // catalog is rank deficient; does not make the codec invalid.
    std::size_t decode_failures = 0;

    Eigen::Index size() const { return encoder.rows(); }
    SpinState encode(const SpinState& x) const;
    SpinState decode(const SpinState& y) const;
    Eigen::VectorXd decode_raw(const SpinState& y) const;
};

// Uses the first P catalog states, one per pattern. Throws CodecError when
// sign(M xi^p) misses its catalog state for some p.
Codec build_codec(const PatternSet& patterns, const std::vector<SpinState>& catalog, double lambda);

// encode, relax, decode
SpinState store_recall(const SpinState& input, const Codec& codec, const CouplingMatrix& coupling,
                       const ExternalField& field, const DynamicsKind& kind, Rng& rng);

// Recall curve in pattern space: corrupt pattern p, encode, relax, decode,
// and compare with pattern p.
RecallReport encoded_recall_curve(const Codec& codec, Eigen::Index pattern, const CouplingMatrix& coupling,
                                  const DynamicsKind& kind, std::size_t max_d, Rng& rng,
                                  const RecallOptions& options = {});

// Distinct metastable states (up to global flip) from SD relaxation of
// random states; at most `max_seeds` starts.
std::vector<SpinState> catalog_metastable(const CouplingMatrix& coupling, std::size_t wanted, std::size_t max_seeds,
                                          Rng& rng);

struct CapacityRow {
    double ratio = 0.0;
    std::size_t n_patterns = 0;
    double mean_basin = 0.0;
    double std_basin = 0.0;
    bool exact = false; // every encoder sign mapping held at construction
    double margin = 0.0;
    std::size_t decode_failures = 0;
};

struct CapacityOptions {
    double width = 1.5;
    double lambda = 0.0; // 0: default_lambda(n)
    std::size_t seed_factor = 20;
    RecallOptions recall{100, true};
    unsigned workers = 1;
};

std::vector<CapacityRow> capacity_sweep(Eigen::Index n, const std::vector<double>& ratios, Rng& rng,
                                        const CapacityOptions& options = {});

// Overlap N^-1 xi^mu . s^mu with the 0TMH attractor s^mu of each pattern.
std::vector<double> hebbian_attractor_overlap(const PatternSet& patterns, const CouplingMatrix& coupling, Rng& rng);

struct NoiseModel {
    double position_sigma = 1.0; // micrometres
    double atom_relative = 0.0;  // relative atom-number fluctuation per ensemble
    double w0_um = 35.0;         // waist used for the micrometre conversion

    // Placement jitter of 1 um and 1/sqrt(M) atom fluctuations with M = total_atoms / n.
    static NoiseModel standard(Eigen::Index n, double total_atoms = 1e6);
    void validate() const;
};

struct ChaosReport {
    std::vector<double> overlaps;
    std::vector<double> weight_changes;
    double mean_overlap = 0.0;
    double std_overlap = 0.0;
    double mean_weight_change = 0.0;
    double std_weight_change = 0.0;
};

// Each trial: SD minimum of J from a random start, relaxed again under a
// perturbed J'. Reports s.s'/N and ||J - J'|| / ||J|| on the off-diagonal part.
ChaosReport weight_chaos(const EnsembleLayout& layout, const ConfocalParams& params, const NoiseModel& noise,
                         std::size_t trials, Rng& rng);

} // namespace glassmem::memory
