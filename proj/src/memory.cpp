#include "glassmem/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>

#include "glassmem/errors.hpp"
#include "glassmem/parallel.hpp"

namespace glassmem::memory {

using landscape::Relaxer;

namespace {

std::string canonical_key(const SpinState& s)
{
    const double flip = s.size() > 0 && s[0] < 0 ? -1.0 : 1.0;
    std::string key(static_cast<std::size_t>(s.size()), '+');
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (flip * s[i] < 0) key[static_cast<std::size_t>(i)] = '-';
    return key;
}

// Moves d uniformly chosen distinct indices to the front of `perm`.
void choose_indices(std::vector<Eigen::Index>& perm, std::size_t d, Rng& rng)
{
    for (std::size_t k = 0; k < d; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, perm.size() - 1);
        std::swap(perm[k], perm[pick(rng)]);
    }
}

struct Tally {
    std::size_t trials = 0;
    std::size_t successes = 0;
};

// Runs the per-distance loop shared by plain and encoded recall. `trial(d)`
// performs one corrupted relaxation and reports success.
template <class Trial>
RecallReport run_recall(std::size_t max_d, const RecallOptions& options, Trial&& trial)
{
    if (options.trials < 1) throw ParameterError("recall needs at least one trial per distance");
    RecallReport rep;
    rep.trials_per_d = options.trials;
    rep.distances.push_back(0);
    rep.trials.push_back(options.trials);
    rep.successes.push_back(options.trials);
    rep.probabilities.push_back(1.0);

    const auto allowed_failures =
        static_cast<std::size_t>(std::floor((1.0 - kRecallThreshold) * static_cast<double>(options.trials) + 1e-9));
    for (std::size_t d = 1; d <= max_d; ++d) {
        Tally t;
        for (std::size_t k = 0; k < options.trials; ++k) {
            ++t.trials;
            if (trial(d)) ++t.successes;
            if (options.early_stop && t.trials - t.successes > allowed_failures) break;
        }
        const double p = static_cast<double>(t.successes) / static_cast<double>(t.trials);
        rep.distances.push_back(d);
        rep.trials.push_back(t.trials);
        rep.successes.push_back(t.successes);
        rep.probabilities.push_back(p);
        if (options.early_stop && p < kRecallThreshold) break;
    }
    rep.basin_size = basin_from_probabilities(rep.probabilities);
    return rep;
}

} // namespace

std::size_t hamming(const SpinState& a, const SpinState& b)
{
    if (a.size() != b.size()) throw ShapeError("hamming distance needs equal lengths");
    std::size_t d = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++d;
    return d;
}

SpinState sign_state(const Eigen::VectorXd& v)
{
    return SpinState(v.unaryExpr([](double x) { return x >= 0 ? 1.0 : -1.0; }).eval());
}

std::size_t basin_from_probabilities(const std::vector<double>& probabilities)
{
    for (std::size_t d = 1; d < probabilities.size(); ++d)
        if (probabilities[d] < kRecallThreshold) return d - 1;
    return probabilities.empty() ? 0 : probabilities.size() - 1;
}

RecallReport recall_curve(const SpinState& attractor, const CouplingMatrix& coupling, const ExternalField& field,
                          const DynamicsKind& kind, std::size_t max_d, Rng& rng, const RecallOptions& options)
{
    Relaxer r(coupling, field, attractor);
    if (!r.is_fixed_point()) throw ParameterError("recall attractor is not a fixed point of steepest descent");
    const auto n = static_cast<std::size_t>(attractor.size());
    max_d = std::min(max_d, n);
    const auto max_steps = landscape::default_max_steps(attractor.size());
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});

    return run_recall(max_d, options, [&](std::size_t d) {
        choose_indices(perm, d, rng);
        for (std::size_t k = 0; k < d; ++k) r.flip(perm[k]);
        const bool converged = r.run(kind, max_steps, rng);
        const bool ok = converged && r.state() == attractor;
        r.reset(attractor);
        return ok;
    });
}

SpinState Codec::encode(const SpinState& x) const
{
    if (x.size() != size()) throw ShapeError("input length does not match the codec");
    return sign_state(encoder * x.values());
}

Eigen::VectorXd Codec::decode_raw(const SpinState& y) const
{
    if (y.size() != size()) throw ShapeError("state length does not match the codec");
    return decoder * y.values();
}

SpinState Codec::decode(const SpinState& y) const { return sign_state(decode_raw(y)); }

namespace {

Codec make_codec(const PatternSet& patterns, const std::vector<SpinState>& catalog, double lambda)
{
    const Eigen::Index n = patterns.size();
    const Eigen::Index p = patterns.count();
    if (!(lambda > 0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive");
    if (static_cast<Eigen::Index>(catalog.size()) < p)
        throw ParameterError("catalog has fewer states than there are patterns");
    std::unordered_set<std::string> seen;
    Eigen::MatrixXd phi(n, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const auto& s = catalog[static_cast<std::size_t>(k)];
        if (s.size() != n) throw ShapeError("catalog state length differs from the patterns");
        std::string key(static_cast<std::size_t>(n), '+');
        for (Eigen::Index i = 0; i < n; ++i)
            if (s[i] < 0) key[static_cast<std::size_t>(i)] = '-';
        if (!seen.insert(key).second) throw ParameterError("catalog states assigned to patterns must be distinct");
        phi.col(k) = s.values();
    }
    const Eigen::MatrixXd xi = patterns.matrix().transpose(); // n x p

    Codec c;
    c.lambda = lambda;
    c.patterns = patterns;
    c.catalog.assign(catalog.begin(), catalog.begin() + p);
    Eigen::MatrixXd a = xi * xi.transpose();
    a.diagonal().array() += lambda;
    // M = (phi xi^T) A^{-1}, A symmetric
    c.encoder = a.llt().solve(xi * phi.transpose()).transpose();
    Eigen::MatrixXd b = phi * phi.transpose();
    b.diagonal().array() += lambda;
    c.decoder = b.llt().solve(phi * xi.transpose()).transpose();
    if (!c.encoder.allFinite() || !c.decoder.allFinite()) throw NumericError("codec solve produced non-finite values");
    return c;
}

struct Violations {
    std::size_t count = 0; // encoder misses
    std::size_t decode_count = 0;
    Eigen::Index worst = -1;
    std::size_t worst_errors = 0;
    double margin = 0.0;
};

Violations check_codec(Codec& c)
{
    Violations v;
    v.margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < c.patterns.count(); ++k) {
        const Eigen::VectorXd x = c.patterns.pattern(k);
        const Eigen::VectorXd y = c.encoder * x;
        v.margin = std::min(v.margin, y.cwiseAbs().minCoeff());
        const auto& target = c.catalog[static_cast<std::size_t>(k)];
        const std::size_t errors = hamming(sign_state(y), target);
        if (hamming(c.decode(target), SpinState(x)) > 0) ++v.decode_count;
        if (errors > 0) {
            ++v.count;
            if (errors > v.worst_errors) v.worst_errors = errors, v.worst = k;
        }
    }
    c.margin = v.margin;
    c.decode_failures = v.decode_count;
    return v;
}

} // namespace

Codec build_codec(const PatternSet& patterns, const std::vector<SpinState>& catalog, double lambda)
{
    Codec c = make_codec(patterns, catalog, lambda);
    const auto v = check_codec(c);
    if (v.count > 0) {
        std::ostringstream msg;
        msg << "codec sign mapping fails for " << v.count << " pattern(s) at lambda " << lambda
            << "; worst pattern " << v.worst << " (" << v.worst_errors << " mismatched entries), margin " << v.margin;
        throw CodecError(msg.str());
    }
    return c;
}

SpinState store_recall(const SpinState& input, const Codec& codec, const CouplingMatrix& coupling,
                       const ExternalField& field, const DynamicsKind& kind, Rng& rng)
{
    const SpinState native = landscape::relax_state(codec.encode(input), coupling, field, kind, rng);
    return codec.decode(native);
}

RecallReport encoded_recall_curve(const Codec& codec, Eigen::Index pattern, const CouplingMatrix& coupling,
                                  const DynamicsKind& kind, std::size_t max_d, Rng& rng,
                                  const RecallOptions& options)
{
    if (pattern < 0 || pattern >= codec.patterns.count()) throw IndexError("pattern index out of range");
    const auto& attractor = codec.catalog[static_cast<std::size_t>(pattern)];
    Relaxer r(coupling, attractor);
    if (!r.is_fixed_point()) throw ParameterError("catalog state is not a fixed point of steepest descent");
    const Eigen::VectorXd xi = codec.patterns.pattern(pattern);
    const SpinState xi_state(xi);
    const Eigen::VectorXd base = codec.encoder * xi;
    const auto n = static_cast<std::size_t>(xi.size());
    max_d = std::min(max_d, n);
    const auto max_steps = landscape::default_max_steps(xi.size());
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Eigen::VectorXd proj(xi.size());

    return run_recall(max_d, options, [&](std::size_t d) {
        choose_indices(perm, d, rng);
        proj = base;
        for (std::size_t k = 0; k < d; ++k) proj.noalias() -= (2.0 * xi[perm[k]]) * codec.encoder.col(perm[k]);
        r.reset(sign_state(proj));
        const bool converged = r.run(kind, max_steps, rng);
        // Reaching the stored image counts even when the decoder misses it.
        bool ok = converged && r.state() == attractor;
        if (converged && !ok) ok = codec.decode(r.state()) == xi_state;
        r.reset(attractor);
        return ok;
    });
}

std::vector<SpinState> catalog_metastable(const CouplingMatrix& coupling, std::size_t wanted, std::size_t max_seeds,
                                          Rng& rng)
{
    const Eigen::Index n = coupling.size();
    std::vector<SpinState> out;
    std::unordered_set<std::string> seen;
    const auto kind = DynamicsKind::sd();
    const auto max_steps = landscape::default_max_steps(n);
    for (std::size_t k = 0; k < max_seeds && out.size() < wanted; ++k) {
        Relaxer r(coupling, SpinState::random(n, rng));
        if (!r.run(kind, max_steps, rng)) throw RelaxationError("SD relaxation did not converge");
        if (seen.insert(canonical_key(r.state())).second) out.push_back(r.state());
    }
    return out;
}

std::vector<CapacityRow> capacity_sweep(Eigen::Index n, const std::vector<double>& ratios, Rng& rng,
                                        const CapacityOptions& options)
{
    if (n < 2) throw ParameterError("capacity sweep needs n >= 2");
    const double lambda = options.lambda > 0 ? options.lambda : default_lambda(n);
    std::vector<CapacityRow> rows;
    for (double ratio : ratios) {
        if (!(ratio > 0) || ratio > 1.0) throw ParameterError("pattern loading ratios must lie in (0, 1]");
        const auto p = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(ratio * n)));
        const std::uint64_t base = rng();

        const auto layout = connectivity::sample_layout(n, options.width, fold_seed(derive_seed(base, "layout", 0)));
        const auto coupling = connectivity::confocal_matrix(layout);
        Rng cat_rng = trial_rng(base, "catalog", 0);
        const auto catalog =
            catalog_metastable(coupling, static_cast<std::size_t>(p), options.seed_factor * static_cast<std::size_t>(p),
                               cat_rng);
        if (static_cast<Eigen::Index>(catalog.size()) < p)
            throw CapacityError("catalog shortfall: found " + std::to_string(catalog.size()) +
                                " distinct metastable states, needed " + std::to_string(p));
        Rng pat_rng = trial_rng(base, "patterns", 0);
        const auto patterns = PatternSet::random(p, n, pat_rng);
        Codec codec = make_codec(patterns, catalog, lambda);
        const auto violations = check_codec(codec);

        const auto basins = parallel_map(static_cast<std::size_t>(p), options.workers, [&](std::size_t k) {
            Rng trial = trial_rng(base, "recall", k);
            const auto rep = encoded_recall_curve(codec, static_cast<Eigen::Index>(k), coupling, DynamicsKind::sd(),
                                                  static_cast<std::size_t>(n / 2), trial, options.recall);
            return static_cast<double>(rep.basin_size);
        });

        CapacityRow row;
        row.ratio = ratio;
        row.n_patterns = static_cast<std::size_t>(p);
        row.exact = violations.count == 0;
        row.margin = codec.margin;
        row.decode_failures = codec.decode_failures;
        double sum = 0.0;
        for (double b : basins) sum += b;
        row.mean_basin = sum / static_cast<double>(basins.size());
        double ss = 0.0;
        for (double b : basins) ss += (b - row.mean_basin) * (b - row.mean_basin);
        row.std_basin = basins.size() > 1 ? std::sqrt(ss / static_cast<double>(basins.size() - 1)) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> hebbian_attractor_overlap(const PatternSet& patterns, const CouplingMatrix& coupling, Rng& rng)
{
    if (coupling.size() != patterns.size()) throw ShapeError("patterns and coupling sizes differ");
    const auto field = ExternalField::zeros(coupling.size());
    const double n = static_cast<double>(patterns.size());
    std::vector<double> out;
    for (Eigen::Index mu = 0; mu < patterns.count(); ++mu) {
        const SpinState xi(patterns.pattern(mu));
        const auto s = landscape::relax_state(xi, coupling, field, DynamicsKind::zero_tmh(), rng);
        out.push_back(xi.values().dot(s.values()) / n);
    }
    return out;
}

NoiseModel NoiseModel::standard(Eigen::Index n, double total_atoms)
{
    if (n < 1 || !(total_atoms >= static_cast<double>(n))) throw ParameterError("need at least one atom per ensemble");
    NoiseModel m;
    m.position_sigma = 1.0;
    m.atom_relative = 1.0 / std::sqrt(total_atoms / static_cast<double>(n));
    return m;
}

void NoiseModel::validate() const
{
    if (!(position_sigma >= 0) || !(atom_relative >= 0)) throw ParameterError("noise levels must be >= 0");
    if (!(w0_um > 0)) throw ParameterError("w0 must be positive");
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd)
{
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

} // namespace

ChaosReport weight_chaos(const EnsembleLayout& layout, const ConfocalParams& params, const NoiseModel& noise,
                         std::size_t trials, Rng& rng)
{
    noise.validate();
    if (trials < 1) throw ParameterError("weight chaos needs at least one trial");
    const Eigen::Index n = layout.size();
    const auto coupling = connectivity::confocal_matrix(layout, params);
    const Eigen::MatrixXd j_off = coupling.off_diagonal();
    const double j_norm = j_off.norm();
    const auto field = ExternalField::zeros(n);
    const double sigma_w0 = noise.position_sigma / noise.w0_um;

    ChaosReport rep;
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto s = landscape::relax_state(SpinState::random(n, rng), coupling, field, DynamicsKind::sd(), rng);

        EnsembleLayout moved = layout;
        for (Eigen::Index i = 0; i < n; ++i)
            for (int c = 0; c < 2; ++c) moved.positions(i, c) += sigma_w0 * unit(rng);
        Eigen::VectorXd eps(n);
        for (Eigen::Index i = 0; i < n; ++i) eps[i] = noise.atom_relative * unit(rng);
        eps.array() -= eps.mean(); // total atom number is conserved

        auto perturbed = connectivity::confocal_matrix(moved, params);
        const Eigen::VectorXd g = (1.0 + eps.array()).matrix();
        perturbed.values = g.asDiagonal() * perturbed.values * g.asDiagonal();

        const auto s2 = landscape::relax_state(s, perturbed, field, DynamicsKind::sd(), rng);
        rep.overlaps.push_back(s.values().dot(s2.values()) / static_cast<double>(n));
        rep.weight_changes.push_back(j_norm > 0 ? (j_off - perturbed.off_diagonal()).norm() / j_norm : 0.0);
    }
    mean_std(rep.overlaps, rep.mean_overlap, rep.std_overlap);
    mean_std(rep.weight_changes, rep.mean_weight_change, rep.std_weight_change);
    return rep;
}

} // namespace glassmem::memory
