#include "glassmem/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glassmem/errors.hpp"

namespace glassmem::landscape {

SpinState::SpinState(Eigen::VectorXd spins) : spins_(std::move(spins))
{
    for (Eigen::Index i = 0; i < spins_.size(); ++i)
        if (spins_[i] != 1.0 && spins_[i] != -1.0)
            throw ParameterError("spin entries must be exactly +1 or -1");
}

SpinState::SpinState(const std::vector<int>& spins)
    : SpinState(Eigen::Map<const Eigen::VectorXi>(spins.data(), static_cast<Eigen::Index>(spins.size()))
                    .cast<double>()
                    .eval())
{
}

SpinState SpinState::uniform(Eigen::Index n, double sign)
{
    return SpinState(Eigen::VectorXd::Constant(n, sign >= 0 ? 1.0 : -1.0));
}

SpinState SpinState::random(Eigen::Index n, Rng& rng)
{
    std::bernoulli_distribution coin(0.5);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = coin(rng) ? 1.0 : -1.0;
    return SpinState(std::move(v));
}

SpinState SpinState::flipped(Eigen::Index i) const
{
    SpinState out = *this;
    out.flip(i);
    return out;
}

SpinState SpinState::operator-() const
{
    SpinState out;
    out.spins_ = -spins_;
    return out;
}

SpinState SpinState::canonical() const
{
    if (spins_.size() > 0 && spins_[0] < 0) return -*this;
    return *this;
}

void DynamicsKind::validate() const
{
    if (finite_temperature() && !(temperature > 0))
        throw ParameterError("finite-temperature dynamics needs temperature > 0");
}

namespace {

void check_shapes(const SpinState& state, const CouplingMatrix& coupling, const ExternalField* field)
{
    if (coupling.values.rows() != coupling.values.cols()) throw ShapeError("coupling matrix is not square");
    if (state.size() != coupling.size()) throw ShapeError("spin state and coupling sizes differ");
    if (field && field->h.size() != state.size()) throw ShapeError("field and spin state sizes differ");
}

// Flips cheaper than this are treated as zero cost.
double zero_cost_tolerance(const Eigen::MatrixXd& j)
{
    const double scale = j.size() > 0 ? j.cwiseAbs().maxCoeff() : 0.0;
    return 1e-12 * static_cast<double>(j.rows()) * std::max(scale, 1e-300);
}

} // namespace

double energy(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field)
{
    check_shapes(state, coupling, &field);
    const auto& s = state.values();
    const double quad = s.dot(coupling.values * s) - coupling.values.diagonal().dot(s.cwiseProduct(s));
    return -quad + field.h.dot(s);
}

double energy(const SpinState& state, const CouplingMatrix& coupling)
{
    return energy(state, coupling, ExternalField::zeros(state.size()));
}

double flip_cost(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                 Eigen::Index i)
{
    check_shapes(state, coupling, &field);
    if (i < 0 || i >= state.size()) throw IndexError("spin index out of range");
    const auto& s = state.values();
    const double local = coupling.values.col(i).dot(s) - coupling.values(i, i) * s[i];
    return 4.0 * s[i] * local - 2.0 * field.h[i] * s[i];
}

double acceptance_probability(const DynamicsKind& kind, double delta)
{
    kind.validate();
    switch (kind.type) {
    case DynamicsType::GlauberT: {
        // exp(-d/T) / (1 + exp(-d/T)) written to avoid overflow
        const double x = delta / kind.temperature;
        if (x > 0) {
            const double e = std::exp(-x);
            return e / (1.0 + e);
        }
        return 1.0 / (1.0 + std::exp(x));
    }
    case DynamicsType::MetropolisT:
        return delta <= 0 ? 1.0 : std::exp(-delta / kind.temperature);
    case DynamicsType::SD:
    case DynamicsType::ZeroTMH:
        return delta < 0 ? 1.0 : 0.0;
    }
    return 0.0;
}

Relaxer::Relaxer(const CouplingMatrix& coupling, const ExternalField& field, SpinState state)
    : j_(&coupling.values), h_(field.h), state_(std::move(state))
{
    check_shapes(state_, coupling, &field);
    local_ = coupling.values * state_.values() - coupling.values.diagonal().cwiseProduct(state_.values());
    tol_ = zero_cost_tolerance(coupling.values);
    scratch_.reserve(static_cast<std::size_t>(state_.size()));
}

Relaxer::Relaxer(const CouplingMatrix& coupling, SpinState state)
    : Relaxer(coupling, ExternalField::zeros(coupling.size()), std::move(state))
{
}

double Relaxer::cost(Eigen::Index i) const
{
    const double s = state_[i];
    return 4.0 * s * local_[i] - 2.0 * h_[i] * s;
}

Eigen::VectorXd Relaxer::costs() const
{
    const auto& s = state_.values();
    return 4.0 * s.cwiseProduct(local_) - 2.0 * h_.cwiseProduct(s);
}

double Relaxer::energy() const
{
    const auto& s = state_.values();
    return -s.dot(local_) + h_.dot(s);
}

bool Relaxer::is_fixed_point() const
{
    const double tol = tol_;
    for (Eigen::Index i = 0; i < size(); ++i)
        if (cost(i) < -tol) return false;
    return true;
}

void Relaxer::flip(Eigen::Index i)
{
    state_.flip(i);
    const double s_new = state_[i];
    local_.noalias() += (2.0 * s_new) * j_->col(i);
    local_[i] -= 2.0 * s_new * (*j_)(i, i);
}

void Relaxer::reset(const SpinState& state)
{
    if (state.size() != size()) throw ShapeError("reset state has the wrong size");
    for (Eigen::Index i = 0; i < size(); ++i)
        if (state[i] != state_[i]) flip(i);
}

std::optional<Flip> Relaxer::step_sd()
{
    const double tol = tol_;
    Eigen::Index best = -1;
    double best_cost = -tol;
    for (Eigen::Index i = 0; i < size(); ++i) {
        const double c = cost(i);
        if (c < best_cost) {
            best_cost = c;
            best = i;
        }
    }
    if (best < 0) return std::nullopt;
    flip(best);
    return Flip{best, best_cost};
}

std::optional<Flip> Relaxer::step_0tmh(Rng& rng)
{
    // Uniform choice among descending flips: same law as drawing uniform
    // indices until the first descending one.
    const double tol = tol_;
    scratch_.clear();
    for (Eigen::Index i = 0; i < size(); ++i)
        if (cost(i) < -tol) scratch_.push_back(i);
    if (scratch_.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, scratch_.size() - 1);
    const Eigen::Index i = scratch_[pick(rng)];
    const double c = cost(i);
    flip(i);
    return Flip{i, c};
}

std::optional<Flip> Relaxer::step_finite_t(const DynamicsKind& kind, Rng& rng)
{
    kind.validate();
    std::uniform_int_distribution<Eigen::Index> pick(0, size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Eigen::Index i = pick(rng);
    const double c = cost(i);
    if (unit(rng) < acceptance_probability(kind, c)) {
        flip(i);
        return Flip{i, c};
    }
    return std::nullopt;
}

std::optional<Flip> Relaxer::step(const DynamicsKind& kind, Rng& rng)
{
    switch (kind.type) {
    case DynamicsType::SD: return step_sd();
    case DynamicsType::ZeroTMH: return step_0tmh(rng);
    case DynamicsType::MetropolisT:
    case DynamicsType::GlauberT: return step_finite_t(kind, rng);
    }
    return std::nullopt;
}

bool Relaxer::run(const DynamicsKind& kind, std::int64_t max_steps, Rng& rng, std::vector<TraceStep>* trace)
{
    if (max_steps < 1) throw ParameterError("max_steps must be >= 1");
    kind.validate();
    double e = trace ? energy() : 0.0;
    if (kind.finite_temperature()) {
        for (std::int64_t k = 0; k < max_steps; ++k) {
            if (auto f = step_finite_t(kind, rng); f && trace) {
                e += f->delta;
                trace->push_back({f->index, f->delta, e});
            }
        }
        return is_fixed_point();
    }
    for (std::int64_t k = 0; k < max_steps; ++k) {
        auto f = kind.type == DynamicsType::SD ? step_sd() : step_0tmh(rng);
        if (!f) return true;
        if (trace) {
            e += f->delta;
            trace->push_back({f->index, f->delta, e});
        }
    }
    return is_fixed_point();
}

std::optional<Flip> step_sd(SpinState& state, const CouplingMatrix& coupling, const ExternalField& field)
{
    Relaxer r(coupling, field, state);
    auto f = r.step_sd();
    state = r.state();
    return f;
}

std::optional<Flip> step_0tmh(SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                              Rng& rng)
{
    Relaxer r(coupling, field, state);
    auto f = r.step_0tmh(rng);
    state = r.state();
    return f;
}

std::optional<Flip> step_finite_t(SpinState& state, const CouplingMatrix& coupling,
                                  const ExternalField& field, const DynamicsKind& kind, Rng& rng)
{
    Relaxer r(coupling, field, state);
    auto f = r.step_finite_t(kind, rng);
    state = r.state();
    return f;
}

std::int64_t default_max_steps(Eigen::Index n)
{
    return std::max<std::int64_t>(100 * static_cast<std::int64_t>(n) * n, 1);
}

RelaxationTrace relax(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                      const DynamicsKind& kind, std::int64_t max_steps, Rng& rng)
{
    Relaxer r(coupling, field, state);
    RelaxationTrace trace;
    trace.converged = r.run(kind, max_steps, rng, &trace.steps);
    trace.final_state = r.state();
    return trace;
}

RelaxationTrace relax(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                      const DynamicsKind& kind, Rng& rng)
{
    return relax(state, coupling, field, kind, default_max_steps(state.size()), rng);
}

SpinState relax_state(const SpinState& state, const CouplingMatrix& coupling, const ExternalField& field,
                      const DynamicsKind& kind, Rng& rng)
{
    Relaxer r(coupling, field, state);
    if (!r.run(kind, default_max_steps(state.size()), rng))
        throw RelaxationError("relaxation did not reach a fixed point");
    return r.state();
}

} // namespace glassmem::landscape
