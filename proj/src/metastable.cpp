#include <cmath>
#include <string>
#include <unordered_set>

#include "glassmem/errors.hpp"
#include "glassmem/landscape.hpp"

namespace glassmem::landscape {

namespace {

std::string key_of(const SpinState& s)
{
    std::string key(static_cast<std::size_t>(s.size()), '+');
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] < 0) key[static_cast<std::size_t>(i)] = '-';
    return key;
}

} // namespace

MetastableCatalog count_metastable(const CouplingMatrix& coupling, const ExternalField& field,
                                   std::size_t n_seeds, Rng& rng)
{
    if (n_seeds < 1) throw ParameterError("count_metastable needs n_seeds >= 1");
    const Eigen::Index n = coupling.size();
    MetastableCatalog out;
    std::unordered_set<std::string> seen;
    const auto kind = DynamicsKind::zero_tmh();
    const auto max_steps = default_max_steps(n);
    for (std::size_t k = 0; k < n_seeds; ++k) {
        Relaxer r(coupling, field, SpinState::random(n, rng));
        if (!r.run(kind, max_steps, rng)) throw RelaxationError("0TMH relaxation did not converge");
        SpinState c = r.state().canonical();
        if (seen.insert(key_of(c)).second) out.states.push_back(std::move(c));
    }
    out.count = out.states.size();
    return out;
}

double scaling_model(const ScalingFit& p, double n, double width)
{
    const double x = std::pow(n, 1.0 / p.nu) * (width - p.w_am);
    return std::sqrt(1.0 + p.a * std::exp(p.b * x));
}

namespace {

// Internal parameter vector: (log A, B, nu, w_am).
using Vec4 = Eigen::Vector4d;

ScalingFit unpack(const Vec4& q)
{
    ScalingFit f;
    f.a = std::exp(q[0]);
    f.b = q[1];
    f.nu = q[2];
    f.w_am = q[3];
    return f;
}

void residuals_and_jacobian(const std::vector<ScalingSample>& data, const Vec4& q, Eigen::VectorXd& r,
                            Eigen::MatrixXd* jac)
{
    const auto p = unpack(q);
    const auto m = static_cast<Eigen::Index>(data.size());
    r.resize(m);
    if (jac) jac->resize(m, 4);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& d = data[static_cast<std::size_t>(k)];
        const double scale = std::pow(d.n, 1.0 / p.nu);
        const double x = scale * (d.width - p.w_am);
        const double e = std::exp(p.b * x);
        const double f = std::sqrt(1.0 + p.a * e);
        r[k] = f - d.count;
        if (jac) {
            const double df_dx = p.a * p.b * e / (2.0 * f);
            (*jac)(k, 0) = p.a * e / (2.0 * f); // d/d(log A)
            (*jac)(k, 1) = p.a * x * e / (2.0 * f);
            (*jac)(k, 2) = df_dx * (-std::log(d.n) / (p.nu * p.nu)) * x;
            (*jac)(k, 3) = df_dx * (-scale);
        }
    }
}

ScalingFit finish(const Vec4& q, double cost, int iterations)
{
    auto out = unpack(q);
    out.residual = cost;
    out.iterations = iterations;
    if (out.a < 1e-10) throw FitError("degenerate scaling fit: amplitude A collapsed to 0", cost);
    return out;
}

} // namespace

ScalingFit fit_metastable_scaling(const std::vector<ScalingSample>& data, ScalingFit init)
{
    {
        std::unordered_set<std::string> distinct;
        for (const auto& d : data) {
            if (!(d.n > 1) || !std::isfinite(d.width) || !std::isfinite(d.count))
                throw ParameterError("scaling samples need finite widths/counts and N > 1");
            distinct.insert(std::to_string(d.n) + "/" + std::to_string(d.width));
        }
        if (distinct.size() < 4) throw ParameterError("scaling fit needs at least 4 distinct (N, w) points");
    }
    bool any_transition = false;
    for (const auto& d : data)
        if (std::abs(d.count - 1.0) > 1e-12) any_transition = true;
    if (!any_transition)
        throw FitError("degenerate scaling fit: every count is 1, no transition present (A -> 0)", 0.0);
    if (!(init.a > 0)) throw ParameterError("initial A must be positive");

    Vec4 q(std::log(init.a), init.b, init.nu, init.w_am);
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    residuals_and_jacobian(data, q, r, &jac);
    double cost = r.squaredNorm();
    double mu = 1e-3;
    constexpr int kMaxIterations = 10000;

    for (int it = 1; it <= kMaxIterations; ++it) {
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Vec4 grad = jac.transpose() * r;
        if (grad.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, cost) || cost < 1e-30)
            return finish(q, cost, it);
        bool accepted = false;
        while (mu < 1e20) {
            Eigen::Matrix4d lhs = jtj;
            lhs.diagonal() += mu * jtj.diagonal().cwiseMax(1e-12);
            const Vec4 step = lhs.ldlt().solve(-grad);
            Vec4 trial = q + step;
            if (!(trial[2] > 0.05)) {
                mu *= 4.0;
                continue;
            }
            Eigen::VectorXd r_trial;
            residuals_and_jacobian(data, trial, r_trial, nullptr);
            const double c_trial = r_trial.squaredNorm();
            if (std::isfinite(c_trial) && c_trial <= cost) {
                const double rel = (step.cwiseAbs().array() / (q.cwiseAbs().array() + 1e-12)).maxCoeff();
                q = trial;
                cost = c_trial;
                residuals_and_jacobian(data, q, r, &jac);
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
                if (rel < 1e-14) return finish(q, cost, it);
                break;
            }
            mu *= 4.0;
        }
        // No descent direction left: stationary point.
        if (!accepted) return finish(q, cost, it);
    }
    throw FitError("scaling fit did not converge within 10000 iterations (residual " + std::to_string(cost) + ")",
                   cost);
}

} // namespace glassmem::landscape
