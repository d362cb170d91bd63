#include "glassmem/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glassmem/errors.hpp"
#include "glassmem/parallel.hpp"

namespace glassmem::experiments {

using connectivity::CouplingMatrix;
using landscape::DynamicsKind;
using landscape::ExternalField;
using landscape::SpinState;

Seed128 SeedLog::derive(std::uint64_t base, const std::string& stream, std::uint64_t index)
{
    const Seed128 s = derive_seed(base, stream, index);
    records.push_back({stream, index, s});
    return s;
}

Seed128 derive_logged(SeedLog* log, std::uint64_t base, const std::string& stream, std::uint64_t index)
{
    return log ? log->derive(base, stream, index) : derive_seed(base, stream, index);
}

namespace {

std::uint64_t width_key(double width) { return static_cast<std::uint64_t>(std::llround(width * 1e6)); }

std::vector<Seed128> derive_all(SeedLog* log, std::uint64_t base, const std::string& stream, std::size_t count)
{
    std::vector<Seed128> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(derive_logged(log, base, stream, k));
    return out;
}

memory::RecallOptions fast_recall(std::size_t trials) { return {trials, true}; }

CouplingMatrix normalized_confocal(std::size_t n, double width, const Seed128& seed)
{
    const auto layout = connectivity::sample_layout(static_cast<Eigen::Index>(n), width, fold_seed(seed));
    CouplingMatrix j = connectivity::confocal_matrix(layout);
    return j;
}

} // namespace

CouplingLaw coupling_law(double width, std::size_t pairs, std::size_t bins, std::uint64_t seed, SeedLog* log)
{
    Rng rng = make_rng(derive_logged(log, seed, "coupling-law", width_key(width)));
    const auto samples = stats::sample_couplings(width, pairs, rng);
    CouplingLaw out;
    out.width = width;
    out.sampled = stats::Histogram::from_samples(samples, -1.0, 1.0, bins);
    out.exact = stats::Histogram::from_cdf([width](double x) { return stats::coupling_cdf(x, width); },
                                           out.sampled.edges);
    out.hellinger = stats::hellinger(out.sampled, out.exact);
    return out;
}

MomentCheck moment_check(double width, std::size_t samples, std::uint64_t seed, SeedLog* log)
{
    Rng rng = make_rng(derive_logged(log, seed, "moments", width_key(width)));
    MomentCheck out;
    out.width = width;
    out.sampled = stats::coupling_monte_carlo(width, samples, rng);
    out.exact = stats::coupling_moments(width);
    out.correlation = stats::coupling_correlation(width);
    out.negative_fraction = stats::negative_fraction(width);
    auto z = [](const stats::Estimate& e, double exact) {
        return e.std_error > 0 ? std::abs(e.value - exact) / e.std_error : (e.value == exact ? 0.0 : INFINITY);
    };
    out.z_mean = z(out.sampled.mean, out.exact.mean);
    out.z_std = z(out.sampled.std, out.exact.std);
    out.z_correlation = z(out.sampled.correlation, out.correlation);
    out.z_negative = z(out.sampled.negative_fraction, out.negative_fraction);
    return out;
}

std::vector<MetastableRow> metastable_grid(const std::vector<std::size_t>& sizes, const std::vector<double>& widths,
                                           std::size_t realizations, std::size_t seeds, std::uint64_t base_seed,
                                           unsigned workers, SeedLog* log)
{
    if (sizes.empty() || widths.empty() || realizations < 1 || seeds < 1)
        throw ParameterError("metastable grid needs sizes, widths, realizations and seeds");
    const std::size_t per_size = widths.size() * realizations;
    const auto keys = derive_all(log, base_seed, "metastable", sizes.size() * per_size);
    const auto counts = parallel_map(keys.size(), workers, [&](std::size_t job) {
        const std::size_t si = job / per_size;
        const std::size_t wi = (job / realizations) % widths.size();
        const auto j = normalized_confocal(sizes[si], widths[wi], derive_seed(keys[job].hi, "layout", keys[job].lo));
        Rng rng = make_rng(keys[job]);
        const auto cat = landscape::count_metastable(j, ExternalField::zeros(j.size()), seeds, rng);
        return static_cast<double>(cat.count);
    });

    std::vector<MetastableRow> rows;
    for (std::size_t si = 0; si < sizes.size(); ++si)
        for (std::size_t wi = 0; wi < widths.size(); ++wi) {
            std::vector<double> c;
            for (std::size_t r = 0; r < realizations; ++r) c.push_back(counts[si * per_size + wi * realizations + r]);
            const auto s = summarize(c);
            rows.push_back({sizes[si], widths[wi], s.mean, s.std, realizations});
        }
    return rows;
}

landscape::ScalingFit fit_metastable_rows(const std::vector<MetastableRow>& rows)
{
    std::vector<landscape::ScalingSample> data;
    for (const auto& r : rows) data.push_back({static_cast<double>(r.n), r.width, r.mean_count});
    return landscape::fit_metastable_scaling(data);
}

namespace {

SpectrumCheck pool_spectra(const std::vector<stats::SpectralSummary>& parts)
{
    SpectrumCheck out;
    for (const auto& p : parts) {
        if (p.degenerate) throw NumericError("degenerate spectrum in a random-matrix check");
        out.eigenvalues.insert(out.eigenvalues.end(), p.eigenvalues.data(),
                               p.eigenvalues.data() + p.eigenvalues.size());
        out.spacings.insert(out.spacings.end(), p.spacings.begin(), p.spacings.end());
    }
    out.hellinger = stats::semicircle_hellinger(out.eigenvalues);
    out.ks = stats::ks_distance(out.spacings, stats::wigner_surmise_cdf);
    return out;
}

} // namespace

SpectrumCheck confocal_spectrum(std::size_t n, double width, std::size_t realizations, std::uint64_t base_seed,
                                unsigned workers, SeedLog* log)
{
    const auto keys = derive_all(log, base_seed, "confocal-spectrum", realizations);
    return pool_spectra(parallel_map(realizations, workers, [&](std::size_t k) {
        return stats::spectral_summary(normalized_confocal(n, width, keys[k]));
    }));
}

SpectrumCheck sk_spectrum(std::size_t n, std::size_t realizations, std::uint64_t base_seed, unsigned workers,
                          SeedLog* log)
{
    const auto keys = derive_all(log, base_seed, "sk-spectrum", realizations);
    return pool_spectra(parallel_map(realizations, workers, [&](std::size_t k) {
        return stats::spectral_summary(connectivity::sk_matrix(static_cast<Eigen::Index>(n),
                                                               1.0 / static_cast<double>(n), fold_seed(keys[k])));
    }));
}

std::vector<RateRow> tabulate_rates(const cavity::CavityParams& params, const cavity::BathSpec& bath,
                                    const std::vector<double>& grid)
{
    if (grid.empty()) throw ParameterError("rate grid is empty");
    const auto kernel = cavity::RateKernel::cavity(params, bath);
    const double t_eff = cavity::effective_temperature(params);
    const double probe = -1e-9 * std::abs(params.delta_c);
    const double k0 = kernel(probe);
    const double g_scale = k0 / cavity::glauber_rate(probe, t_eff);
    const double m_scale = k0 / cavity::metropolis_rate(probe, t_eff);
    std::vector<RateRow> rows;
    for (double de : grid)
        rows.push_back({de, kernel(de), g_scale * cavity::glauber_rate(de, t_eff),
                        m_scale * cavity::metropolis_rate(de, t_eff)});
    return rows;
}

std::vector<ThermometryPoint> thermometry(const cavity::CavityParams& params, std::size_t points)
{
    params.validate();
    if (points < 1) throw ParameterError("thermometry needs at least one point");
    const double t_eff = cavity::effective_temperature(params);
    std::vector<ThermometryPoint> out;
    for (std::size_t k = 1; k <= points; ++k) {
        const double de = 0.1 * std::abs(params.delta_c) * static_cast<double>(k) / static_cast<double>(points);
        const double ratio = cavity::rate_confocal(de, params) / cavity::rate_confocal(-de, params);
        out.push_back({de, std::log(ratio), -de / t_eff});
    }
    return out;
}

constexpr int kScenarioAttempts = 200;
constexpr int kScenarioDraws = 2000;

DynamicsScenario dynamics_scenario(const ScenarioOptions& options, std::uint64_t seed)
{
    if (options.misaligned > options.n) throw ParameterError("more misaligned ensembles than ensembles");
    options.params.validate();
    const auto n = static_cast<Eigen::Index>(options.n);
    Rng rng = trial_rng(seed, "scenario", 0);
    const auto full = normalized_confocal(options.n, options.width, derive_seed(seed, "layout", 0));
    CouplingMatrix jn = full;
    jn.values = full.off_diagonal();
    const auto field = ExternalField::zeros(n);

    // The chosen ensembles must be misaligned with their local field and all
    // others aligned with theirs, in the perturbed state.
    auto admissible = [&](const SpinState& s, const std::vector<Eigen::Index>& chosen) {
        landscape::Relaxer r(jn, field, s);
        std::vector<char> mark(options.n, 0);
        for (auto i : chosen) mark[static_cast<std::size_t>(i)] = 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double c = r.cost(i);
            if (mark[static_cast<std::size_t>(i)] ? !(c < 0.0) : !(c > 0.0)) return false;
        }
        return true;
    };

    DynamicsScenario sc;
    std::vector<Eigen::Index> idx(options.n);
    bool found = false;
    for (int attempt = 0; attempt < kScenarioAttempts && !found; ++attempt) {
        sc.start_minimum = landscape::relax_state(SpinState::random(n, rng), jn, field, DynamicsKind::sd(), rng);
        for (int draw = 0; draw < kScenarioDraws && !found; ++draw) {
            std::iota(idx.begin(), idx.end(), Eigen::Index{0});
            std::shuffle(idx.begin(), idx.end(), rng);
            std::vector<Eigen::Index> chosen(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(options.misaligned));
            std::sort(chosen.begin(), chosen.end());
            SpinState s = sc.start_minimum;
            for (auto i : chosen) s.flip(i);
            if (admissible(s, chosen)) {
                sc.misaligned = chosen;
                found = true;
            }
        }
    }
    if (!found) throw RelaxationError("no admissible misaligned set found for the dynamics scenario");
    SpinState start = sc.start_minimum;
    for (auto i : sc.misaligned) start.flip(i);
    sc.sd_target = landscape::relax_state(start, jn, field, DynamicsKind::sd(), rng);

    const double row_max = jn.values.cwiseAbs().rowwise().sum().maxCoeff();
    sc.scale = std::abs(options.params.delta_c) / (2.0 * options.spin * std::max(row_max, 1e-300));
    sc.coupling = jn;
    sc.coupling.normalized = false;
    sc.coupling.values *= sc.scale;
    sc.coupling.values.diagonal().setConstant(options.diagonal * sc.scale);
    sc.coupling.diag_beta = options.diagonal * sc.scale;
    sc.initial = cavity::EnsembleState::from_signs(start.values(), options.spin);
    sc.kernel = cavity::RateKernel::cavity(options.params);
    return sc;
}

DynamicsOutcome run_dynamics(const DynamicsScenario& sc, std::uint64_t seed, const DynamicsOptions& options)
{
    DynamicsOutcome out;
    cavity::MeanfieldOptions mf;
    mf.stop_when_settled = true;
    out.trajectory = cavity::meanfield_integrate(sc.initial, sc.coupling, sc.kernel, options.t_max, mf);
    out.t_settle = out.trajectory.times.back() - sc.initial.time;
    out.settled = out.t_settle < options.t_max;
    out.meanfield_final = memory::sign_state(out.trajectory.m.back());
    out.meanfield_match = out.meanfield_final == sc.sd_target;
    out.predicted_flip_times = cavity::predict_flip_times(sc.initial, sc.coupling, sc.kernel);

    cavity::EnsembleState st = sc.initial;
    out.energy.reserve(out.trajectory.size());
    for (const auto& m : out.trajectory.m) {
        st.m = m;
        out.energy.push_back(cavity::ensemble_energy(st, sc.coupling));
    }
    out.energy_drop = out.energy.front() - out.energy.back();
    const double tol = options.rise_tolerance * std::max(std::abs(out.energy_drop), 1e-300);
    for (std::size_t k = 1; k < out.energy.size(); ++k) {
        const double rise = out.energy[k] - out.energy[k - 1];
        if (rise > tol) ++out.energy_rises;
        out.max_energy_rise = std::max(out.max_energy_rise, rise / std::max(std::abs(out.energy_drop), 1e-300));
    }
    for (std::size_t k = 1; k < out.trajectory.size(); ++k)
        for (Eigen::Index i = 0; i < sc.initial.size(); ++i)
            if ((out.trajectory.m[k][i] >= 0) != (out.trajectory.m[k - 1][i] >= 0)) ++out.sign_changes;

    const double t_unravel = out.settled ? options.unravel_factor * out.t_settle : options.t_max;
    Rng rng = trial_rng(seed, "unravel", 0);
    out.events = cavity::unravel(sc.initial, sc.coupling, sc.kernel, t_unravel, rng);
    out.unravel_final = memory::sign_state(out.events.final.m);
    out.unravel_match = out.unravel_final == sc.sd_target;
    return out;
}

BasinStats summarize(std::vector<double> values)
{
    BasinStats s;
    s.samples = values.size();
    if (!values.empty()) {
        s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    }
    s.values = std::move(values);
    return s;
}

namespace {

double basin_of(const SpinState& attractor, const CouplingMatrix& j, const DynamicsKind& kind, std::size_t trials,
                Rng& rng)
{
    const auto rep = memory::recall_curve(attractor, j, ExternalField::zeros(j.size()), kind,
                                          static_cast<std::size_t>(j.size() / 2), rng, fast_recall(trials));
    return static_cast<double>(rep.basin_size);
}

Eigen::Index pattern_count(std::size_t n, double ratio)
{
    if (!(ratio > 0)) throw ParameterError("pattern loading ratio must be positive");
    return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(ratio * static_cast<double>(n))));
}

} // namespace

PseudoinverseBasins pseudoinverse_basins(std::size_t n, double ratio, std::size_t patterns_measured,
                                         std::size_t trials, std::uint64_t base_seed, unsigned workers,
                                         SeedLog* log)
{
    const auto p = pattern_count(n, ratio);
    Rng prng = make_rng(derive_logged(log, base_seed, "pseudoinverse-patterns", width_key(ratio)));
    const auto patterns = connectivity::PatternSet::random(p, static_cast<Eigen::Index>(n), prng);
    const auto j = connectivity::pseudoinverse_matrix(patterns);
    const std::size_t measured = std::min<std::size_t>(patterns_measured, static_cast<std::size_t>(p));
    const Seed128 base = derive_logged(log, base_seed, "pseudoinverse-recall", width_key(ratio));

    const auto pairs = parallel_map(measured, workers, [&](std::size_t k) {
        const SpinState xi(patterns.pattern(static_cast<Eigen::Index>(k)));
        Rng r_sd = make_rng(derive_seed(base.hi ^ base.lo, "sd", k));
        Rng r_tmh = make_rng(derive_seed(base.hi ^ base.lo, "0tmh", k));
        return std::pair{basin_of(xi, j, DynamicsKind::sd(), trials, r_sd),
                         basin_of(xi, j, DynamicsKind::zero_tmh(), trials, r_tmh)};
    });
    std::vector<double> sd, tmh;
    for (const auto& [a, b] : pairs) {
        sd.push_back(a);
        tmh.push_back(b);
    }
    return {ratio, summarize(std::move(sd)), summarize(std::move(tmh))};
}

HebbianOverlap hebbian_overlap(std::size_t n, double ratio, std::size_t realizations, std::uint64_t base_seed,
                               unsigned workers, SeedLog* log)
{
    const auto p = pattern_count(n, ratio);
    const auto keys = derive_all(log, base_seed, "hebbian-overlap-" + std::to_string(width_key(ratio)), realizations);
    const auto parts = parallel_map(realizations, workers, [&](std::size_t k) {
        Rng rng = make_rng(keys[k]);
        const auto patterns = connectivity::PatternSet::random(p, static_cast<Eigen::Index>(n), rng);
        return memory::hebbian_attractor_overlap(patterns, connectivity::hebbian_matrix(patterns), rng);
    });
    HebbianOverlap out;
    out.ratio = ratio;
    for (const auto& v : parts) out.overlaps.insert(out.overlaps.end(), v.begin(), v.end());
    const auto s = summarize(out.overlaps);
    out.mean = s.mean;
    out.std = s.std;
    return out;
}

BasinStats hebbian_basins(std::size_t n, double ratio, std::size_t patterns_measured, std::size_t trials,
                          std::uint64_t base_seed, unsigned workers, SeedLog* log)
{
    const auto p = pattern_count(n, ratio);
    Rng prng = make_rng(derive_logged(log, base_seed, "hebbian-patterns", width_key(ratio)));
    const auto patterns = connectivity::PatternSet::random(p, static_cast<Eigen::Index>(n), prng);
    const auto j = connectivity::hebbian_matrix(patterns);
    const std::size_t measured = std::min<std::size_t>(patterns_measured, static_cast<std::size_t>(p));
    const Seed128 base = derive_logged(log, base_seed, "hebbian-recall", width_key(ratio));
    return summarize(parallel_map(measured, workers, [&](std::size_t k) {
        const SpinState xi(patterns.pattern(static_cast<Eigen::Index>(k)));
        landscape::Relaxer r(j, xi);
        if (!r.is_fixed_point()) return 0.0;
        Rng rng = make_rng(derive_seed(base.hi ^ base.lo, "sd", k));
        return basin_of(xi, j, DynamicsKind::sd(), trials, rng);
    }));
}

namespace {

MinimaBasins minima_basins(const std::vector<CouplingMatrix>& couplings, std::size_t seeds, std::size_t trials,
                           const std::vector<Seed128>& keys, unsigned workers)
{
    const std::size_t jobs = couplings.size() * seeds;
    const auto pairs = parallel_map(jobs, workers, [&](std::size_t job) {
        const auto& j = couplings[job / seeds];
        const Seed128& key = keys[job];
        const auto field = ExternalField::zeros(j.size());
        Rng r_sd = make_rng(derive_seed(key.hi, "sd", key.lo));
        Rng r_tmh = make_rng(derive_seed(key.hi, "0tmh", key.lo));
        const auto a = landscape::relax_state(SpinState::random(j.size(), r_sd), j, field, DynamicsKind::sd(), r_sd);
        const auto b =
            landscape::relax_state(SpinState::random(j.size(), r_tmh), j, field, DynamicsKind::zero_tmh(), r_tmh);
        return std::pair{basin_of(a, j, DynamicsKind::sd(), trials, r_sd),
                         basin_of(b, j, DynamicsKind::zero_tmh(), trials, r_tmh)};
    });
    MinimaBasins out;
    std::vector<double> sd, tmh;
    for (const auto& [a, b] : pairs) {
        sd.push_back(a);
        tmh.push_back(b);
    }
    out.sd = summarize(std::move(sd));
    out.zero_tmh = summarize(std::move(tmh));
    return out;
}

} // namespace

MinimaBasins sk_basins(std::size_t n, std::size_t realizations, std::size_t seeds, std::size_t trials,
                       std::uint64_t base_seed, unsigned workers, SeedLog* log)
{
    const std::string tag = "sk-basins-" + std::to_string(n);
    const auto mats = derive_all(log, base_seed, tag + "/matrix", realizations);
    std::vector<CouplingMatrix> couplings;
    for (const auto& k : mats)
        couplings.push_back(
            connectivity::sk_matrix(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n), fold_seed(k)));
    const auto keys = derive_all(log, base_seed, tag + "/start", realizations * seeds);
    auto out = minima_basins(couplings, seeds, trials, keys, workers);
    out.n = n;
    return out;
}

MinimaBasins confocal_basins(std::size_t n, double width, std::size_t realizations, std::size_t seeds,
                             std::size_t trials, std::uint64_t base_seed, unsigned workers, SeedLog* log)
{
    const std::string tag = "confocal-basins-" + std::to_string(n) + "-" + std::to_string(width_key(width));
    const auto mats = derive_all(log, base_seed, tag + "/layout", realizations);
    std::vector<CouplingMatrix> couplings;
    for (const auto& k : mats) couplings.push_back(normalized_confocal(n, width, k));
    const auto keys = derive_all(log, base_seed, tag + "/start", realizations * seeds);
    auto out = minima_basins(couplings, seeds, trials, keys, workers);
    out.n = n;
    out.width = width;
    return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("line fit needs two or more (x, y) pairs");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (!(sxx > 0)) throw ParameterError("line fit needs distinct x values");
    return {sxy / sxx, my - sxy / sxx * mx};
}

ChaosRow chaos_point(std::size_t n, double width, std::size_t realizations, std::size_t trials,
                     const memory::NoiseModel& noise, std::uint64_t base_seed, unsigned workers, SeedLog* log)
{
    const auto keys =
        derive_all(log, base_seed, "chaos-" + std::to_string(n) + "-" + std::to_string(width_key(width)), realizations);
    const auto parts = parallel_map(realizations, workers, [&](std::size_t k) {
        const auto layout = connectivity::sample_layout(static_cast<Eigen::Index>(n), width, fold_seed(keys[k]));
        Rng rng = make_rng(derive_seed(keys[k].hi, "trials", keys[k].lo));
        return memory::weight_chaos(layout, {}, noise, trials, rng);
    });
    std::vector<double> ov, wc;
    for (const auto& p : parts) {
        ov.insert(ov.end(), p.overlaps.begin(), p.overlaps.end());
        wc.insert(wc.end(), p.weight_changes.begin(), p.weight_changes.end());
    }
    const auto so = summarize(ov);
    const auto sw = summarize(wc);
    return {n, width, so.mean, so.std, sw.mean, sw.std, so.samples};
}

} // namespace glassmem::experiments
