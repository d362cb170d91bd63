#pragma once

// Independent numerical references used by the unit and acceptance tests.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "glassmem/cavity.hpp"

namespace oracle {

class Workspace {
public:
    explicit Workspace(std::size_t limit = 20000) : limit_(limit), w_(gsl_integration_workspace_alloc(limit))
    {
        gsl_set_error_handler_off();
    }
    ~Workspace() { gsl_integration_workspace_free(w_); }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    gsl_integration_workspace* get() { return w_; }
    std::size_t limit() const { return limit_; }

private:
    std::size_t limit_;
    gsl_integration_workspace* w_;
};

inline double trampoline(double x, void* p) { return (*static_cast<std::function<double(double)>*>(p))(x); }

// Adaptive Gauss-Kronrod over [a, b], split into `pieces` panels so that
// oscillatory integrands stay well resolved. Panels that cancel to ~0 need
// the absolute tolerance.
inline double integrate(std::function<double(double)> f, double a, double b, int pieces = 1, double abs_tol = 1e-15,
                        double rel = 1e-10)
{
    Workspace ws;
    gsl_function g{&trampoline, &f};
    double total = 0.0;
    const double h = (b - a) / pieces;
    for (int k = 0; k < pieces; ++k) {
        double r = 0, err = 0;
        const int status =
            gsl_integration_qag(&g, a + k * h, a + (k + 1) * h, abs_tol, rel, ws.limit(), GSL_INTEG_GAUSS61, ws.get(), &r, &err);
        if (status != GSL_SUCCESS && status != GSL_EROUND) throw std::runtime_error(gsl_strerror(status));
        total += r;
    }
    return total;
}

// Integrable endpoint singularities: QAGS on a finite interval.
inline double integrate_singular(std::function<double(double)> f, double a, double b, double rel = 1e-10)
{
    Workspace ws;
    gsl_function g{&trampoline, &f};
    double r = 0, err = 0;
    const int status = gsl_integration_qags(&g, a, b, 0.0, rel, ws.limit(), ws.get(), &r, &err);
    if (status != GSL_SUCCESS && status != GSL_EROUND) throw std::runtime_error(gsl_strerror(status));
    return r;
}

// Cavity part of the flip rate with every mode at delta_c:
// (w_z^2/8) Re int_0^inf dt e^{-i de t} [exp(-x (1 - e^{-(kappa - i delta_c) t})) - e^{-x}],
// x = j_ii/|delta_c|. The subtracted e^{-x} is the zero-energy delta term.
// The upper limit puts the integrand envelope below 1e-14.
inline double cavity_rate_quadrature(double de, const glassmem::cavity::CavityParams& p)
{
    const double x = p.j_ii / std::abs(p.delta_c);
    const double t_end = std::log(x / 1e-14) / p.kappa;
    const std::complex<double> rate(p.kappa, -p.delta_c);
    auto f = [&](double t) {
        const std::complex<double> tail = std::exp(-x * (1.0 - std::exp(-rate * t))) - std::exp(-x);
        return std::real(std::exp(std::complex<double>(0, -de * t)) * tail);
    };
    const double cycles = (std::abs(de) + 2.0 * std::abs(p.delta_c)) * t_end / (2.0 * M_PI);
    const int pieces = std::max(4, static_cast<int>(std::ceil(cycles / 4.0)));
    return p.omega_z * p.omega_z / 8.0 * integrate(f, 0.0, t_end, pieces);
}

// Zero-energy peak under classical ohmic noise, where the noise enters as
// exp(-alpha ln(1 + w_c^2 t^2)):
// (w_z^2/8) e^{-x} int_0^inf dt cos(de t) (1 + w_c^2 t^2)^{-alpha}.
inline double classical_peak_quadrature(double de, const glassmem::cavity::CavityParams& p,
                                        const glassmem::cavity::ClassicalOhmic& b)
{
    const double x = p.j_ii / std::abs(p.delta_c);
    // power-law tail: (w_c t)^{-2 alpha} < 1e-16 of the start
    const double t_end = std::pow(1e16, 1.0 / (2.0 * b.alpha)) / b.omega_c;
    auto f = [&](double t) {
        return std::cos(de * t) * std::exp(-b.alpha * std::log1p(b.omega_c * b.omega_c * t * t));
    };
    const double cycles = std::abs(de) * t_end / (2.0 * M_PI);
    const int pieces = std::max(8, static_cast<int>(std::ceil(cycles / 4.0)));
    return p.omega_z * p.omega_z / 8.0 * std::exp(-x) * integrate(f, 0.0, t_end, pieces);
}

} // namespace oracle
