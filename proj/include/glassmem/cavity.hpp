#pragma once

#include <cstdint>
#include <numbers>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "glassmem/connectivity.hpp"
#include "glassmem/random.hpp"

// Spin-flip rate kernels and ensemble dynamics of the pumped confocal cavity.
//
// Units: angular frequencies in rad/us, energies in the same units (hbar = 1),
// times in us.
namespace glassmem::cavity {

using connectivity::CouplingMatrix;

// 2 pi x f, for f given in MHz.
constexpr double angular_from_mhz(double mhz) { return 2.0 * std::numbers::pi * mhz; }

struct CavityParams {
    double omega_z = angular_from_mhz(1.0);
    double delta_c = angular_from_mhz(-3.0); // pump-cavity detuning, red (< 0)
    double kappa = angular_from_mhz(0.15);   // cavity field decay rate
    double j_ii = 0.1 * angular_from_mhz(3.0);

    void validate() const;
};

struct NoBath {};

struct ClassicalOhmic {
    double alpha = 20.0;
    double omega_c = angular_from_mhz(0.004);
};

struct QuantumOhmic {
    double alpha_q = 2.0;
    double omega_c = angular_from_mhz(0.004);
};

using BathSpec = std::variant<NoBath, ClassicalOhmic, QuantumOhmic>;

// Treatment of the peak at zero flip energy in the confocal kernel.
using PeakModel = std::variant<NoBath, ClassicalOhmic>;

void validate(const BathSpec& bath);

double effective_temperature(const CavityParams& params);

// n = 1 Lorentzian centred at delta_c, the far-detuned confocal term.
double lorentzian_first_order(double delta_e, const CavityParams& params);

// Full multi-photon Lorentzian series, truncated once the next term is below
// `tolerance` relative to the running sum (past the last resonance).
double lorentzian_series(double delta_e, const CavityParams& params, double tolerance = 1e-12);

// Central peak broadened by classical ohmic noise. Finite at delta_e = 0 for
// alpha > 1/2; throws DivergenceError there otherwise.
double classical_peak(double delta_e, const CavityParams& params, const ClassicalOhmic& bath);

// Bath term for a quantum ohmic bath, without the omega_z^2 e^{-x} / 8 prefactor.
// Zero for delta_e > 0.
double quantum_peak(double delta_e, const QuantumOhmic& bath);

double rate_confocal(double delta_e, const CavityParams& params, const PeakModel& peak = NoBath{});
double rate_classical_ohmic(double delta_e, const CavityParams& params, const ClassicalOhmic& bath,
                            double tolerance = 1e-12);
double rate_quantum_ohmic(double delta_e, const CavityParams& params, const QuantumOhmic& bath,
                          double tolerance = 1e-12);

double glauber_rate(double delta_e, double temperature);
double metropolis_rate(double delta_e, double temperature);

// t_1/2 = sqrt(2^{2 pi / (alpha ds^2)} - 1) / omega_c
double decoherence_half_time(double alpha, double omega_c, std::int64_t delta_s);

enum class KernelFamily : std::uint8_t { Cavity, Glauber, Metropolis };

// A spin-flip rate function K(delta_e). Cavity kernels dispatch on the bath:
// NoBath uses the far-detuned confocal form, the ohmic baths their series forms.
struct RateKernel {
    KernelFamily family = KernelFamily::Cavity;
    CavityParams params{};
    BathSpec bath = NoBath{};
    double temperature = 1.0; // Glauber / Metropolis only
    double scale = 1.0;       // Glauber / Metropolis only

    static RateKernel cavity(const CavityParams& params, const BathSpec& bath = NoBath{});
    static RateKernel glauber(double temperature, double scale = 1.0);
    static RateKernel metropolis(double temperature, double scale = 1.0);

    double operator()(double delta_e) const;
};

// Continuous ensemble description: m_i in [-1, 1], spin magnitudes S_i = M_i / 2.
struct EnsembleState {
    Eigen::VectorXd m;
    Eigen::VectorXd s_mag;
    double time = 0.0;

    static EnsembleState from_signs(const Eigen::VectorXd& signs, double s);
    Eigen::Index size() const { return m.size(); }
    void validate() const;
};

// delta_e_i^{+-} = -J_ii -+ 2 sum_j J_ij S_j m_j  (direction = +1 or -1)
double ensemble_flip_cost(const EnsembleState& state, const CouplingMatrix& coupling, Eigen::Index i,
                          int direction);

// H = -sum_{i,j} J_ij S_i m_i S_j m_j, diagonal included.
double ensemble_energy(const EnsembleState& state, const CouplingMatrix& coupling);

struct Event {
    double time;
    Eigen::Index index;
    int direction;
};

struct EventTrace {
    std::vector<Event> events;
    EnsembleState final;
    bool quiescent = false;
};

struct UnravelOptions {
    std::size_t max_events = 50'000'000;
    double quiescence_rate = 1e-30;
};

// Event-driven unraveling with superradiant collective rates.
EventTrace unravel(const EnsembleState& initial, const CouplingMatrix& coupling, const RateKernel& kernel,
                   double t_max, Rng& rng, const UnravelOptions& options = {});
EventTrace unravel(const EnsembleState& initial, const CouplingMatrix& coupling, const CavityParams& params,
                   const BathSpec& bath, double t_max, Rng& rng);

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> m;

    std::size_t size() const { return times.size(); }
};

struct MeanfieldOptions {
    double tolerance = 1e-8;
    double min_step = 1e-12;
    double max_step = 0.0;          // 0: t_max / 100
    double flip_threshold = 0.999;  // |m| below this marks an ensemble mid-flip
    std::size_t max_steps = 10'000'000;
    // Stop before t_max once every ensemble is aligned with its local field
    // and max |dm/dt| has dropped below settle_rate.
    bool stop_when_settled = false;
    double settle_rate = 1e-8;
};

// Right-hand side of the mean-field magnetization equations.
Eigen::VectorXd meanfield_rhs(const Eigen::VectorXd& m, const Eigen::VectorXd& s_mag,
                              const CouplingMatrix& coupling, const RateKernel& kernel);

Trajectory meanfield_integrate(const EnsembleState& initial, const CouplingMatrix& coupling,
                               const RateKernel& kernel, double t_max, const MeanfieldOptions& options = {});
Trajectory meanfield_integrate(const EnsembleState& initial, const CouplingMatrix& coupling,
                               const CavityParams& params, const BathSpec& bath, double t_max);

// Per-ensemble flip-onset estimate t0_i. Negative: will not flip.
// +infinity: the rates are equal, so the onset is never reached.
std::vector<double> predict_flip_times(const EnsembleState& state, const CouplingMatrix& coupling,
                                       const RateKernel& kernel);

} // namespace glassmem::cavity
