#include <cmath>
#include <limits>
#include <numbers>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "glassmem/cavity.hpp"
#include "glassmem/errors.hpp"

namespace glassmem::cavity {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double self_ratio(const CavityParams& p) { return p.j_ii / std::abs(p.delta_c); }

// log K_nu(x) for x > 0, any real order.
double log_bessel_k(double nu, double x)
{
    static const bool handler_off = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)handler_off;
    gsl_sf_result res;
    const int status = gsl_sf_bessel_lnKnu_e(std::abs(nu), x, &res);
    if (status != GSL_SUCCESS) throw NumericError("modified Bessel function evaluation failed");
    return res.val;
}

} // namespace

void CavityParams::validate() const
{
    if (!(delta_c < 0)) throw ParameterError("delta_c must be negative (red detuning)");
    if (!(kappa > 0)) throw ParameterError("kappa must be positive");
    if (!(omega_z > 0)) throw ParameterError("omega_z must be positive");
    if (!(j_ii >= 0)) throw ParameterError("j_ii must be nonnegative");
}

void validate(const BathSpec& bath)
{
    std::visit(overloaded{
                   [](const NoBath&) {},
                   [](const ClassicalOhmic& b) {
                       if (!(b.alpha > 0) || !(b.omega_c > 0))
                           throw ParameterError("classical ohmic bath needs alpha > 0 and omega_c > 0");
                   },
                   [](const QuantumOhmic& b) {
                       if (!(b.alpha_q > 0) || !(b.omega_c > 0))
                           throw ParameterError("quantum ohmic bath needs alpha_q > 0 and omega_c > 0");
                   },
               },
               bath);
}

double effective_temperature(const CavityParams& p)
{
    return (p.delta_c * p.delta_c + p.kappa * p.kappa) / (4.0 * std::abs(p.delta_c));
}

double lorentzian_first_order(double delta_e, const CavityParams& p)
{
    const double ad = std::abs(p.delta_c);
    const double d = delta_e - p.delta_c;
    return std::exp(-self_ratio(p)) * p.j_ii * p.omega_z * p.omega_z * p.kappa /
           (8.0 * ad * (d * d + p.kappa * p.kappa));
}

double lorentzian_series(double delta_e, const CavityParams& p, double tolerance)
{
    const double x = self_ratio(p);
    if (x == 0.0) return 0.0;
    const double ad = std::abs(p.delta_c);
    // Terms may grow until the resonance delta_e = n delta_c is passed.
    const double n_res = delta_e < 0 ? std::ceil(-delta_e / ad) + 1.0 : 1.0;
    const double log_x = std::log(x);
    double sum = 0.0;
    for (int n = 1; n < 100000; ++n) {
        const double dn = static_cast<double>(n);
        const double weight = std::exp(dn * log_x - std::lgamma(dn + 1.0));
        const double d = delta_e - dn * p.delta_c;
        const double term = weight * dn * p.kappa / (d * d + dn * dn * p.kappa * p.kappa);
        sum += term;
        if (dn > n_res && term <= tolerance * sum) break;
    }
    return p.omega_z * p.omega_z / 8.0 * std::exp(-x) * sum;
}

double classical_peak(double delta_e, const CavityParams& p, const ClassicalOhmic& bath)
{
    validate(BathSpec{bath});
    const double a = bath.alpha;
    const double log_pref = 0.5 * std::log(2.0 * kPi) + 2.0 * std::log(p.omega_z) - self_ratio(p) -
                            std::log(8.0) - std::lgamma(a) - a * std::log(2.0);
    const double ade = std::abs(delta_e);
    if (ade == 0.0) {
        if (!(a > 0.5))
            throw DivergenceError("classical ohmic peak diverges at zero flip energy for alpha <= 1/2");
        // K_nu(u) ~ Gamma(nu)/2 (2/u)^nu as u -> 0
        return std::exp(log_pref + std::lgamma(a - 0.5) + (a - 1.5) * std::log(2.0)) / bath.omega_c;
    }
    const double u = ade / bath.omega_c;
    const double log_h = log_pref - 0.5 * std::log(bath.omega_c * ade) + a * std::log(u) +
                         log_bessel_k(a - 0.5, u);
    return std::exp(log_h);
}

double quantum_peak(double delta_e, const QuantumOhmic& bath)
{
    validate(BathSpec{bath});
    if (delta_e > 0) return 0.0;
    const double a = bath.alpha_q;
    const double u = -delta_e / bath.omega_c;
    if (u == 0.0) {
        if (a < 1.0) throw DivergenceError("quantum bath rate diverges at zero flip energy for alpha_q < 1");
        return a == 1.0 ? kPi / bath.omega_c : 0.0;
    }
    return std::exp(std::log(kPi) - std::lgamma(a) - std::log(bath.omega_c) - u + (a - 1.0) * std::log(u));
}

double rate_confocal(double delta_e, const CavityParams& p, const PeakModel& peak)
{
    const double lorentz = lorentzian_first_order(delta_e, p);
    return lorentz + std::visit(overloaded{
                                    [](const NoBath&) { return 0.0; },
                                    [&](const ClassicalOhmic& b) { return classical_peak(delta_e, p, b); },
                                },
                                peak);
}

double rate_classical_ohmic(double delta_e, const CavityParams& p, const ClassicalOhmic& bath, double tolerance)
{
    return classical_peak(delta_e, p, bath) + lorentzian_series(delta_e, p, tolerance);
}

double rate_quantum_ohmic(double delta_e, const CavityParams& p, const QuantumOhmic& bath, double tolerance)
{
    const double pref = p.omega_z * p.omega_z / 8.0 * std::exp(-self_ratio(p));
    return pref * quantum_peak(delta_e, bath) + lorentzian_series(delta_e, p, tolerance);
}

double glauber_rate(double delta_e, double temperature)
{
    if (!(temperature > 0)) throw ParameterError("temperature must be positive");
    const double x = delta_e / temperature;
    if (x > 0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double metropolis_rate(double delta_e, double temperature)
{
    if (!(temperature > 0)) throw ParameterError("temperature must be positive");
    return delta_e <= 0 ? 1.0 : std::exp(-delta_e / temperature);
}

double decoherence_half_time(double alpha, double omega_c, std::int64_t delta_s)
{
    if (!(alpha > 0) || !(omega_c > 0)) throw ParameterError("alpha and omega_c must be positive");
    if (delta_s < 1) throw ParameterError("delta_s must be >= 1");
    const double ds = static_cast<double>(delta_s);
    return std::sqrt(std::expm1(std::log(2.0) * 2.0 * kPi / (alpha * ds * ds))) / omega_c;
}

RateKernel RateKernel::cavity(const CavityParams& params, const BathSpec& bath)
{
    params.validate();
    validate(bath);
    RateKernel k;
    k.family = KernelFamily::Cavity;
    k.params = params;
    k.bath = bath;
    return k;
}

RateKernel RateKernel::glauber(double temperature, double scale)
{
    if (!(temperature > 0)) throw ParameterError("temperature must be positive");
    RateKernel k;
    k.family = KernelFamily::Glauber;
    k.temperature = temperature;
    k.scale = scale;
    return k;
}

RateKernel RateKernel::metropolis(double temperature, double scale)
{
    if (!(temperature > 0)) throw ParameterError("temperature must be positive");
    RateKernel k;
    k.family = KernelFamily::Metropolis;
    k.temperature = temperature;
    k.scale = scale;
    return k;
}

double RateKernel::operator()(double delta_e) const
{
    switch (family) {
    case KernelFamily::Glauber: return scale * glauber_rate(delta_e, temperature);
    case KernelFamily::Metropolis: return scale * metropolis_rate(delta_e, temperature);
    case KernelFamily::Cavity: break;
    }
    return std::visit(overloaded{
                          [&](const NoBath&) { return rate_confocal(delta_e, params); },
                          [&](const ClassicalOhmic& b) { return rate_classical_ohmic(delta_e, params, b); },
                          [&](const QuantumOhmic& b) { return rate_quantum_ohmic(delta_e, params, b); },
                      },
                      bath);
}

} // namespace glassmem::cavity
