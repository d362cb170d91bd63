#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "glassmem/cavity.hpp"
#include "glassmem/errors.hpp"

namespace glassmem::cavity {

namespace {

void check_coupling(const EnsembleState& state, const CouplingMatrix& coupling)
{
    if (coupling.values.rows() != coupling.values.cols()) throw ShapeError("coupling matrix is not square");
    if (coupling.size() != state.size()) throw ShapeError("ensemble state and coupling sizes differ");
}

double sgn(double x) { return (x > 0) - (x < 0); }

} // namespace

EnsembleState EnsembleState::from_signs(const Eigen::VectorXd& signs, double s)
{
    if (!(s >= 0.5)) throw ParameterError("spin magnitude must be >= 1/2");
    EnsembleState out;
    out.m = signs.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
    out.s_mag = Eigen::VectorXd::Constant(signs.size(), s);
    return out;
}

void EnsembleState::validate() const
{
    if (m.size() != s_mag.size()) throw ShapeError("magnetization and spin-magnitude lengths differ");
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (!(std::abs(m[i]) <= 1.0)) throw ParameterError("magnetization outside [-1, 1]");
        if (!(s_mag[i] >= 0.5)) throw ParameterError("spin magnitude must be >= 1/2");
    }
}

double ensemble_flip_cost(const EnsembleState& state, const CouplingMatrix& coupling, Eigen::Index i,
                          int direction)
{
    check_coupling(state, coupling);
    if (i < 0 || i >= state.size()) throw IndexError("ensemble index out of range");
    if (direction != 1 && direction != -1) throw ParameterError("direction must be +1 or -1");
    const double ell = coupling.values.col(i).dot(state.s_mag.cwiseProduct(state.m));
    return -coupling.values(i, i) - 2.0 * direction * ell;
}

double ensemble_energy(const EnsembleState& state, const CouplingMatrix& coupling)
{
    check_coupling(state, coupling);
    const Eigen::VectorXd sx = state.s_mag.cwiseProduct(state.m);
    return -sx.dot(coupling.values * sx);
}

EventTrace unravel(const EnsembleState& initial, const CouplingMatrix& coupling, const RateKernel& kernel,
                   double t_max, Rng& rng, const UnravelOptions& options)
{
    check_coupling(initial, coupling);
    initial.validate();
    if (!(t_max > 0)) throw ParameterError("t_max must be positive");
    const Eigen::Index n = initial.size();
    const auto& j = coupling.values;

    // Spin projections s_i = S_i m_i, moved in unit steps.
    Eigen::VectorXd sx = initial.s_mag.cwiseProduct(initial.m);
    Eigen::VectorXd ell = j * sx;
    const Eigen::VectorXd cap = (initial.s_mag.array() * (initial.s_mag.array() + 1.0)).matrix();

    EventTrace trace;
    double t = initial.time;
    const double t_end = initial.time + t_max;
    std::exponential_distribution<double> expo(1.0);
    Eigen::VectorXd up(n), down(n);

    while (trace.events.size() < options.max_events) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double eps_up = -j(i, i) - 2.0 * ell[i];
            const double eps_down = -j(i, i) + 2.0 * ell[i];
            up[i] = std::max(0.0, cap[i] - sx[i] * (sx[i] + 1.0)) * kernel(eps_up);
            down[i] = std::max(0.0, cap[i] - sx[i] * (sx[i] - 1.0)) * kernel(eps_down);
            total += up[i] + down[i];
        }
        if (total < options.quiescence_rate) {
            trace.quiescent = true;
            break;
        }
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index who = -1;
        int dir = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (up[i] > 0) {
                const double w = expo(rng) / up[i];
                if (w < best) best = w, who = i, dir = +1;
            }
            if (down[i] > 0) {
                const double w = expo(rng) / down[i];
                if (w < best) best = w, who = i, dir = -1;
            }
        }
        double t_next = t + best;
        if (!(t_next < t_end)) break;
        if (t_next <= t) t_next = std::nextafter(t, std::numeric_limits<double>::infinity());
        t = t_next;
        sx[who] += dir;
        ell.noalias() += static_cast<double>(dir) * j.col(who);
        trace.events.push_back({t, who, dir});
    }

    trace.final.s_mag = initial.s_mag;
    trace.final.m = sx.cwiseQuotient(initial.s_mag).cwiseMax(-1.0).cwiseMin(1.0);
    trace.final.time = trace.quiescent ? t : t_end;
    return trace;
}

EventTrace unravel(const EnsembleState& initial, const CouplingMatrix& coupling, const CavityParams& params,
                   const BathSpec& bath, double t_max, Rng& rng)
{
    return unravel(initial, coupling, RateKernel::cavity(params, bath), t_max, rng);
}

namespace {

// Returns dm/dt and reports max_i S_i |K+ - K-| through `flip_speed`.
Eigen::VectorXd rhs_with_speed(const Eigen::VectorXd& m, const Eigen::VectorXd& s_mag,
                               const Eigen::MatrixXd& j, const RateKernel& kernel, double& flip_speed)
{
    const Eigen::VectorXd ell = j * s_mag.cwiseProduct(m);
    Eigen::VectorXd out(m.size());
    flip_speed = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double kp = kernel(-j(i, i) - 2.0 * ell[i]);
        const double km = kernel(-j(i, i) + 2.0 * ell[i]);
        const double dk = std::abs(kp - km);
        flip_speed = std::max(flip_speed, s_mag[i] * dk);
        out[i] = sgn(ell[i]) * s_mag[i] * dk * (1.0 - m[i] * m[i]) + kp * (1.0 - m[i]) - km * (1.0 + m[i]);
    }
    return out;
}

bool settled(const Eigen::VectorXd& m, const Eigen::VectorXd& dm, const Eigen::VectorXd& s_mag,
             const Eigen::MatrixXd& j, double rate)
{
    if (dm.cwiseAbs().maxCoeff() > rate) return false;
    const Eigen::VectorXd ell = j * s_mag.cwiseProduct(m);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        if (sgn(ell[i]) * sgn(m[i]) < 0) return false;
    return true;
}

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

} // namespace

Eigen::VectorXd meanfield_rhs(const Eigen::VectorXd& m, const Eigen::VectorXd& s_mag,
                              const CouplingMatrix& coupling, const RateKernel& kernel)
{
    if (m.size() != s_mag.size() || coupling.size() != m.size())
        throw ShapeError("mean-field inputs have inconsistent sizes");
    double unused = 0.0;
    return rhs_with_speed(m, s_mag, coupling.values, kernel, unused);
}

Trajectory meanfield_integrate(const EnsembleState& initial, const CouplingMatrix& coupling,
                               const RateKernel& kernel, double t_max, const MeanfieldOptions& options)
{
    check_coupling(initial, coupling);
    initial.validate();
    if (!(t_max > 0)) throw ParameterError("t_max must be positive");
    const auto& j = coupling.values;
    const auto& s_mag = initial.s_mag;
    const double h_max = options.max_step > 0 ? options.max_step : t_max / 100.0;
    const double t_end = initial.time + t_max;

    Trajectory traj;
    Eigen::VectorXd m = initial.m;
    double t = initial.time;
    traj.times.push_back(t);
    traj.m.push_back(m);

    std::array<Eigen::VectorXd, 7> k;
    double speed = 0.0;
    k[0] = rhs_with_speed(m, s_mag, j, kernel, speed);
    double h = std::min(h_max, 1e-3);
    std::size_t steps = 0;

    while (t < t_end) {
        if (++steps > options.max_steps) throw StiffnessError("mean-field integration exceeded max_steps");
        double cap = h_max;
        if ((m.array().abs() < options.flip_threshold).any() && speed > 0) cap = std::min(cap, 0.01 / speed);
        h = std::min(h, cap);
        const bool last = t + h >= t_end;
        if (last) h = t_end - t;

        for (int st = 1; st < 7; ++st) {
            Eigen::VectorXd y = m;
            for (int q = 0; q < st; ++q)
                if (kA[st][q] != 0.0) y.noalias() += h * kA[st][q] * k[static_cast<std::size_t>(q)];
            double unused = 0.0;
            k[static_cast<std::size_t>(st)] = rhs_with_speed(y, s_mag, j, kernel, unused);
        }
        Eigen::VectorXd y5 = m;
        Eigen::VectorXd err = Eigen::VectorXd::Zero(m.size());
        for (std::size_t st = 0; st < 7; ++st) {
            y5.noalias() += h * kB5[st] * k[st];
            err.noalias() += h * (kB5[st] - kB4[st]) * k[st];
        }
        const Eigen::ArrayXd scale =
            options.tolerance * (1.0 + m.array().abs().max(y5.array().abs()));
        const double e = std::sqrt((err.array() / scale).square().mean());

        if (!(e <= 1.0) || !y5.allFinite()) {
            h *= std::max(0.2, 0.9 * std::pow(std::isfinite(e) ? e : 1e10, -0.2));
            if (h < options.min_step)
                throw StiffnessError("mean-field step size fell below " + std::to_string(options.min_step));
            continue;
        }

        t = last ? t_end : t + h;
        m = y5.cwiseMax(-1.0).cwiseMin(1.0);
        traj.times.push_back(t);
        traj.m.push_back(m);
        k[0] = rhs_with_speed(m, s_mag, j, kernel, speed);
        if (options.stop_when_settled && settled(m, k[0], s_mag, j, options.settle_rate)) break;
        // Growth capped at 2x per step.
        h *= e > 0 ? std::min(2.0, 0.9 * std::pow(e, -0.2)) : 2.0;
    }
    return traj;
}

Trajectory meanfield_integrate(const EnsembleState& initial, const CouplingMatrix& coupling,
                               const CavityParams& params, const BathSpec& bath, double t_max)
{
    return meanfield_integrate(initial, coupling, RateKernel::cavity(params, bath), t_max);
}

std::vector<double> predict_flip_times(const EnsembleState& state, const CouplingMatrix& coupling,
                                       const RateKernel& kernel)
{
    check_coupling(state, coupling);
    state.validate();
    const auto& j = coupling.values;
    const Eigen::VectorXd ell = j * state.s_mag.cwiseProduct(state.m);
    std::vector<double> out(static_cast<std::size_t>(state.size()));
    for (Eigen::Index i = 0; i < state.size(); ++i) {
        const double kp = kernel(-j(i, i) - 2.0 * ell[i]);
        const double km = kernel(-j(i, i) + 2.0 * ell[i]);
        const double dk = std::abs(kp - km);
        const double s = state.s_mag[i];
        out[static_cast<std::size_t>(i)] =
            dk > 0 ? -sgn(ell[i] * state.m[i]) * std::log(8.0 * s) / (8.0 * s * dk)
                   : std::numeric_limits<double>::infinity();
    }
    return out;
}

} // namespace glassmem::cavity
