#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "glassmem/connectivity.hpp"
#include "glassmem/random.hpp"

namespace glassmem::landscape {

using connectivity::CouplingMatrix;

// Binary spin configuration. Stored as doubles so it feeds Eigen products
// directly; every entry is exactly +1 or -1.
class SpinState {
public:
    SpinState() = default;
    explicit SpinState(Eigen::VectorXd spins);
    explicit SpinState(const std::vector<int>& spins);

    static SpinState uniform(Eigen::Index n, double sign = 1.0);
    static SpinState random(Eigen::Index n, Rng& rng);

    Eigen::Index size() const { return spins_.size(); }
    double operator[](Eigen::Index i) const { return spins_[i]; }
    const Eigen::VectorXd& values() const { return spins_; }

    void flip(Eigen::Index i) { spins_[i] = -spins_[i]; }
    SpinState flipped(Eigen::Index i) const;
    SpinState operator-() const;

    // Representative of {s, -s} with the first spin +1.
    SpinState canonical() const;

    friend bool operator==(const SpinState& a, const SpinState& b) { return a.spins_ == b.spins_; }

private:
    Eigen::VectorXd spins_;
};

struct ExternalField {
    Eigen::VectorXd h;

    static ExternalField zeros(Eigen::Index n) { return {Eigen::VectorXd::Zero(n)}; }
};

enum class DynamicsType : std::uint8_t { SD, ZeroTMH, MetropolisT, GlauberT };

struct DynamicsKind {
    DynamicsType type = DynamicsType::SD;
    double temperature = 0.0;

    static DynamicsKind sd() { return {DynamicsType::SD, 0.0}; }
    static DynamicsKind zero_tmh() { return {DynamicsType::ZeroTMH, 0.0}; }
    static DynamicsKind metropolis(double t) { return {DynamicsType::MetropolisT, t}; }
    static DynamicsKind glauber(double t) { return {DynamicsType::GlauberT, t}; }

    bool finite_temperature() const
    {
        return type == DynamicsType::MetropolisT || type == DynamicsType::GlauberT;
    }
    void validate() const;
};

struct Flip {
    Eigen::Index index;
    double delta;
};

struct TraceStep {
    Eigen::Index index;
    double delta_energy;
    double energy_after;
};

struct RelaxationTrace {
    std::vector<TraceStep> steps;
    SpinState final_state;
    bool converged = false;
};

// H = -sum_{i != j} J_ij s_i s_j + sum_i h_i s_i (ordered pairs).
double energy(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field);
double energy(const SpinState& state, const CouplingMatrix& coupling);

// Energy change of flipping spin i under the convention above.
double flip_cost(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                 Eigen::Index i);

// Acceptance probability for a proposed flip of cost delta at finite temperature.
double acceptance_probability(const DynamicsKind& kind, double delta);

// Single-spin dynamics over a cached local field l_i = sum_{j != i} J_ij s_j.
// Construction costs O(N^2); each flip and each step costs O(N).
class Relaxer {
public:
    Relaxer(const CouplingMatrix& coupling, const ExternalField& field, SpinState state);
    Relaxer(const CouplingMatrix& coupling, SpinState state);

    const SpinState& state() const { return state_; }
    const Eigen::VectorXd& local_fields() const { return local_; }
    Eigen::Index size() const { return state_.size(); }

    double cost(Eigen::Index i) const;
    Eigen::VectorXd costs() const;
    double energy() const;
    bool is_fixed_point() const;

    void flip(Eigen::Index i);

    // Replace the state, reusing cached fields: O(N * #differences).
    void reset(const SpinState& state);

    std::optional<Flip> step_sd();
    std::optional<Flip> step_0tmh(Rng& rng);
    std::optional<Flip> step_finite_t(const DynamicsKind& kind, Rng& rng);
    std::optional<Flip> step(const DynamicsKind& kind, Rng& rng);

    // Runs until a fixed point (SD/0TMH) or max_steps. Returns whether it
    // converged; appends to `trace` when given.
    bool run(const DynamicsKind& kind, std::int64_t max_steps, Rng& rng,
             std::vector<TraceStep>* trace = nullptr);

private:
    const Eigen::MatrixXd* j_;
    Eigen::VectorXd h_;
    SpinState state_;
    Eigen::VectorXd local_;
    double tol_ = 0.0; // zero-cost tolerance, fixed by the coupling
    std::vector<Eigen::Index> scratch_;
};

std::optional<Flip> step_sd(SpinState& state, const CouplingMatrix& coupling, const ExternalField& field);
std::optional<Flip> step_0tmh(SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                              Rng& rng);
std::optional<Flip> step_finite_t(SpinState& state, const CouplingMatrix& coupling,
                                  const ExternalField& field, const DynamicsKind& kind, Rng& rng);

std::int64_t default_max_steps(Eigen::Index n);

RelaxationTrace relax(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                      const DynamicsKind& kind, std::int64_t max_steps, Rng& rng);
RelaxationTrace relax(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                      const DynamicsKind& kind, Rng& rng);

// Relaxes to a fixed point and returns it. Throws RelaxationError on non-convergence.
SpinState relax_state(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                      const DynamicsKind& kind, Rng& rng);

struct MetastableCatalog {
    std::size_t count = 0;
    std::vector<SpinState> states; // canonical, first spin +1, in discovery order
};

MetastableCatalog count_metastable(const CouplingMatrix& coupling, const ExternalField& field,
                                   std::size_t n_seeds, Rng& rng);

// Finite-size scaling of the metastable-state count,
// N(x) = sqrt(1 + A exp(B x)),  x = N^{1/nu} (w - w_am).
struct ScalingSample {
    double n;
    double width;
    double count;
};

struct ScalingFit {
    double a = 0.33;
    double b = 3.4;
    double nu = 2.4;
    double w_am = 0.67;
    double residual = 0.0; // sum of squared residuals
    int iterations = 0;
};

double scaling_model(const ScalingFit& params, double n, double width);

ScalingFit fit_metastable_scaling(const std::vector<ScalingSample>& data, ScalingFit init = {});

} // namespace glassmem::landscape
