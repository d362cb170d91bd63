#include "glassmem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "glassmem/errors.hpp"
#include "glassmem/parallel.hpp"

namespace glassmem::stats {

namespace {

constexpr double kPi = std::numbers::pi;

void check_width(double width)
{
    if (!(width > 0) || !std::isfinite(width)) throw ParameterError("width must be positive and finite");
}

struct Positions {
    std::normal_distribution<double> gauss;
    explicit Positions(double width) : gauss(0.0, width) {}
    Eigen::Vector2d draw(Rng& rng) { return {gauss(rng), gauss(rng)}; }
};

double coupling(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return std::cos(2.0 * a.dot(b)); }

Estimate mean_estimate(const std::vector<double>& xs)
{
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double m2 = 0.0;
    for (double x : xs) m2 += (x - mean) * (x - mean);
    const double var = xs.size() > 1 ? m2 / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

Estimate proportion(std::size_t hits, std::size_t n)
{
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

} // namespace

double coupling_pdf(double j, double width)
{
    check_width(width);
    if (!(std::abs(j) < 1.0)) throw DomainError("coupling density is defined on the open interval (-1, 1)");
    const double w2 = width * width;
    const double a = kPi / (2.0 * w2);
    const double b = (kPi - std::acos(j)) / (2.0 * w2);
    // csch(a) cosh(b), in a form that stays finite for small widths
    const double ratio = std::exp(b - a) * (1.0 + std::exp(-2.0 * b)) / (-std::expm1(-2.0 * a));
    return ratio / (2.0 * w2 * std::sqrt(1.0 - j * j));
}

double coupling_cdf(double j, double width)
{
    check_width(width);
    if (j <= -1.0) return 0.0;
    if (j >= 1.0) return 1.0;
    const double w2 = width * width;
    const double a = kPi / (2.0 * w2);
    const double b = (kPi - std::acos(j)) / (2.0 * w2);
    return std::exp(b - a) * std::expm1(-2.0 * b) / std::expm1(-2.0 * a);
}

Moments coupling_moments(double width)
{
    check_width(width);
    const double w4 = std::pow(width, 4);
    const double mean = 1.0 / (1.0 + 4.0 * w4);
    const double std = 4.0 * w4 / (1.0 + 4.0 * w4) * std::sqrt((5.0 + 8.0 * w4) / (1.0 + 16.0 * w4));
    return {mean, std};
}

double coupling_correlation(double width)
{
    check_width(width);
    return 1.0 / (1.0 + 8.0 * std::pow(width, 4));
}

double negative_fraction(double width)
{
    check_width(width);
    return 0.5 / std::cosh(kPi / (4.0 * width * width));
}

Estimate frustration_probability(double width, std::size_t n_triples, Rng& rng)
{
    check_width(width);
    if (n_triples < 1) throw ParameterError("n_triples must be >= 1");
    Positions pos(width);
    std::size_t hits = 0;
    for (std::size_t k = 0; k < n_triples; ++k) {
        const auto a = pos.draw(rng), b = pos.draw(rng), c = pos.draw(rng);
        if (coupling(a, b) * coupling(b, c) * coupling(c, a) < 0) ++hits;
    }
    return proportion(hits, n_triples);
}

std::vector<double> sample_couplings(double width, std::size_t n_pairs, Rng& rng)
{
    check_width(width);
    Positions pos(width);
    std::vector<double> out(n_pairs);
    for (auto& v : out) {
        const auto a = pos.draw(rng);
        v = coupling(a, pos.draw(rng));
    }
    return out;
}

CouplingMonteCarlo coupling_monte_carlo(double width, std::size_t n, Rng& rng)
{
    if (n < 2) throw ParameterError("Monte Carlo needs at least 2 samples");
    const auto pairs = sample_couplings(width, n, rng);
    CouplingMonteCarlo out;
    out.mean = mean_estimate(pairs);

    // Standard error of the sample std by the delta method.
    const double mu = out.mean.value;
    double m2 = 0.0, m4 = 0.0;
    for (double x : pairs) {
        const double d2 = (x - mu) * (x - mu);
        m2 += d2;
        m4 += d2 * d2;
    }
    const double dn = static_cast<double>(n);
    m2 /= dn;
    m4 /= dn;
    const double sd = std::sqrt(m2);
    out.std = {sd, sd > 0 ? std::sqrt(std::max(0.0, m4 - m2 * m2) / dn) / (2.0 * sd) : 0.0};

    std::size_t neg = 0;
    for (double x : pairs)
        if (x < 0) ++neg;
    out.negative_fraction = proportion(neg, n);

    Positions pos(width);
    std::vector<double> products(n);
    for (auto& v : products) {
        const auto a = pos.draw(rng), b = pos.draw(rng), c = pos.draw(rng);
        v = coupling(a, b) * coupling(b, c);
    }
    out.correlation = mean_estimate(products);
    return out;
}

Histogram Histogram::uniform_edges(double lo, double hi, std::size_t bins)
{
    if (!(hi > lo) || bins < 1) throw ParameterError("histogram needs hi > lo and at least one bin");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
        h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    h.densities.assign(bins, 0.0);
    return h;
}

Histogram Histogram::from_samples(const std::vector<double>& samples, double lo, double hi, std::size_t bins)
{
    Histogram h = uniform_edges(lo, hi, bins);
    std::vector<std::size_t> counts(bins, 0);
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (double x : samples) {
        if (!(x >= lo && x <= hi)) continue;
        auto k = static_cast<std::size_t>((x - lo) * scale);
        if (k >= bins) k = bins - 1;
        ++counts[k];
        ++h.count;
    }
    if (h.count == 0) return h;
    for (std::size_t k = 0; k < bins; ++k)
        h.densities[k] = static_cast<double>(counts[k]) / (static_cast<double>(h.count) * h.width(k));
    return h;
}

Histogram Histogram::from_cdf(const std::function<double(double)>& cdf, const std::vector<double>& edges)
{
    if (edges.size() < 2) throw ParameterError("histogram needs at least one bin");
    Histogram h;
    h.edges = edges;
    h.densities.resize(edges.size() - 1);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        h.densities[k] = (cdf(edges[k + 1]) - cdf(edges[k])) / (edges[k + 1] - edges[k]);
    h.validate();
    return h;
}

double Histogram::mass() const
{
    double m = 0.0;
    for (std::size_t k = 0; k < bins(); ++k) m += densities[k] * width(k);
    return m;
}

void Histogram::validate() const
{
    if (edges.size() != densities.size() + 1 || densities.empty())
        throw ParameterError("histogram edges and densities are inconsistent");
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        if (!(edges[k + 1] > edges[k])) throw ParameterError("histogram edges must be strictly increasing");
    for (double d : densities)
        if (!(d >= 0) || !std::isfinite(d)) throw ParameterError("histogram densities must be finite and >= 0");
}

double hellinger(const Histogram& p, const Histogram& q)
{
    p.validate();
    q.validate();
    const double mp = p.mass(), mq = q.mass();
    if (!(mp > 0) || !(mq > 0)) throw ParameterError("hellinger distance of an empty histogram");

    double h2 = 0.0;
    if (p.edges == q.edges) {
        for (std::size_t k = 0; k < p.bins(); ++k) {
            const double d = std::sqrt(p.densities[k] / mp) - std::sqrt(q.densities[k] / mq);
            h2 += d * d * p.width(k);
        }
    } else {
        std::vector<double> grid = p.edges;
        grid.insert(grid.end(), q.edges.begin(), q.edges.end());
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        auto density_at = [](const Histogram& h, double x) {
            if (x < h.edges.front() || x >= h.edges.back()) return 0.0;
            const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
            return h.densities[static_cast<std::size_t>(it - h.edges.begin()) - 1];
        };
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            const double mid = 0.5 * (grid[k] + grid[k + 1]);
            const double d = std::sqrt(density_at(p, mid) / mp) - std::sqrt(density_at(q, mid) / mq);
            h2 += d * d * (grid[k + 1] - grid[k]);
        }
    }
    return std::sqrt(std::clamp(0.5 * h2, 0.0, 1.0));
}

double semicircle_density(double x)
{
    if (std::abs(x) >= 2.0) return 0.0;
    return std::sqrt(4.0 - x * x) / (2.0 * kPi);
}

double semicircle_cdf(double x)
{
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * kPi) + std::asin(x / 2.0) / kPi;
}

double wigner_surmise(double s)
{
    if (s < 0) return 0.0;
    return kPi * s / 2.0 * std::exp(-kPi * s * s / 4.0);
}

double wigner_surmise_cdf(double s)
{
    if (s <= 0) return 0.0;
    return -std::expm1(-kPi * s * s / 4.0);
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    if (samples.empty()) throw ParameterError("KS distance of an empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

SpectralSummary spectral_summary(const connectivity::CouplingMatrix& coupling)
{
    coupling.validate();
    const Eigen::MatrixXd a = coupling.off_diagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericError("eigensolver failed");

    SpectralSummary out;
    out.eigenvalues = eig.eigenvalues();
    const Eigen::Index n = out.eigenvalues.size();
    const double mean = n > 0 ? out.eigenvalues.mean() : 0.0;
    const double sd = n > 0 ? std::sqrt((out.eigenvalues.array() - mean).square().mean()) : 0.0;
    const double scale = a.size() > 0 ? std::max(1.0, a.cwiseAbs().maxCoeff()) : 1.0;
    if (n < 2 || !(sd > 1e-12 * scale)) {
        out.degenerate = true;
        return out;
    }
    out.eigenvalues /= sd;

    const auto& lam = out.eigenvalues;
    const Eigen::Index w = std::min<Eigen::Index>(kUnfoldWindow, n);
    const Eigen::Index half = w / 2;
    std::vector<double> s(static_cast<std::size_t>(n - 1));
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const Eigen::Index lo = std::clamp<Eigen::Index>(k - half + 1, 0, n - w);
        const double local = (lam[lo + w - 1] - lam[lo]) / static_cast<double>(w - 1);
        if (!(local > 0)) {
            out.degenerate = true;
            return out;
        }
        s[static_cast<std::size_t>(k)] = (lam[k + 1] - lam[k]) / local;
    }
    double total = 0.0;
    for (double v : s) total += v;
    const double mean_s = total / static_cast<double>(s.size());
    if (!(mean_s > 0)) {
        out.degenerate = true;
        return out;
    }
    for (auto& v : s) v /= mean_s;
    out.spacings = std::move(s);
    return out;
}

Histogram eigenvalue_histogram(const std::vector<double>& eigenvalues)
{
    return Histogram::from_samples(eigenvalues, kSpectrumLo, kSpectrumHi, kSpectrumBins);
}

Histogram semicircle_histogram()
{
    return Histogram::from_cdf(semicircle_cdf,
                               Histogram::uniform_edges(kSpectrumLo, kSpectrumHi, kSpectrumBins).edges);
}

double semicircle_hellinger(const std::vector<double>& eigenvalues)
{
    return hellinger(eigenvalue_histogram(eigenvalues), semicircle_histogram());
}

double collapse_score(const std::vector<CollapseCurve>& curves)
{
    if (curves.size() < 2) return 0.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& c : curves) {
        if (c.rescaled.size() < 2) throw ParameterError("collapse curves need at least two points");
        lo = std::max(lo, c.rescaled.front());
        hi = std::min(hi, c.rescaled.back());
    }
    if (!(hi > lo)) return std::numeric_limits<double>::infinity();

    // Rescaling is multiplicative, so compare on a log-spaced grid.
    constexpr int kGrid = 101;
    const bool logx = lo > 0.0;
    auto at = [&](int g) {
        const double t = g / (kGrid - 1.0);
        return logx ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    };
    auto interp = [logx](const CollapseCurve& c, double x) {
        const auto& xs = c.rescaled;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t k = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
        k = std::min(k, xs.size() - 2);
        const double t = logx ? std::log(x / xs[k]) / std::log(xs[k + 1] / xs[k]) : (x - xs[k]) / (xs[k + 1] - xs[k]);
        return c.distance[k] + t * (c.distance[k + 1] - c.distance[k]);
    };
    std::vector<std::vector<double>> values(curves.size(), std::vector<double>(kGrid));
    for (std::size_t c = 0; c < curves.size(); ++c)
        for (int g = 0; g < kGrid; ++g)
            values[c][static_cast<std::size_t>(g)] = interp(curves[c], at(g));

    double total = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < curves.size(); ++a)
        for (std::size_t b = a + 1; b < curves.size(); ++b) {
            double ss = 0.0;
            for (int g = 0; g < kGrid; ++g) {
                const double d = values[a][static_cast<std::size_t>(g)] - values[b][static_cast<std::size_t>(g)];
                ss += d * d;
            }
            total += std::sqrt(ss / kGrid);
            ++pairs;
        }
    return total / pairs;
}

CollapseData collapse_data(const std::vector<double>& widths, const std::vector<std::size_t>& sizes,
                           std::size_t trials, std::uint64_t base_seed, unsigned workers)
{
    if (widths.empty() || sizes.empty() || trials < 1)
        throw ParameterError("collapse needs widths, sizes and at least one trial");
    if (!std::is_sorted(widths.begin(), widths.end())) throw ParameterError("collapse widths must be sorted");
    // Smaller N get proportionally more realizations, so every (N, w) pools
    // about the same number of eigenvalues and shares one noise floor.
    const std::size_t nw = widths.size();
    const double n_max = static_cast<double>(*std::max_element(sizes.begin(), sizes.end()));
    std::vector<std::size_t> reps, offset;
    std::size_t jobs = 0;
    for (auto n : sizes) {
        reps.push_back(static_cast<std::size_t>(std::ceil(static_cast<double>(trials) * n_max / static_cast<double>(n))));
        offset.push_back(jobs);
        jobs += reps.back() * nw;
    }
    auto spectra = parallel_map(jobs, workers, [&](std::size_t job) {
        const std::size_t si = static_cast<std::size_t>(std::upper_bound(offset.begin(), offset.end(), job) - offset.begin()) - 1;
        const std::size_t wi = (job - offset[si]) / reps[si];
        const auto layout = connectivity::sample_layout(static_cast<Eigen::Index>(sizes[si]), widths[wi],
                                                        fold_seed(derive_seed(base_seed, "collapse", job)));
        const auto summary = spectral_summary(connectivity::confocal_matrix(layout));
        return std::vector<double>(summary.eigenvalues.data(),
                                   summary.eigenvalues.data() + summary.eigenvalues.size());
    });

    CollapseData out;
    out.widths = widths;
    for (auto n : sizes) out.sizes.push_back(static_cast<double>(n));
    out.distance.resize(static_cast<Eigen::Index>(sizes.size()), static_cast<Eigen::Index>(nw));
    for (std::size_t si = 0; si < sizes.size(); ++si)
        for (std::size_t wi = 0; wi < nw; ++wi) {
            std::vector<double> pooled;
            for (std::size_t t = 0; t < reps[si]; ++t) {
                const auto& e = spectra[offset[si] + wi * reps[si] + t];
                pooled.insert(pooled.end(), e.begin(), e.end());
            }
            out.distance(static_cast<Eigen::Index>(si), static_cast<Eigen::Index>(wi)) =
                semicircle_hellinger(pooled);
        }
    return out;
}

std::vector<CollapseResult> hellinger_collapse(const CollapseData& data, const std::vector<double>& nus)
{
    std::vector<CollapseResult> out;
    for (double nu : nus) {
        if (nu == 0.0) throw ParameterError("collapse exponent must be nonzero");
        CollapseResult r;
        r.nu = nu;
        for (std::size_t si = 0; si < data.sizes.size(); ++si) {
            CollapseCurve c;
            c.n = data.sizes[si];
            const double f = std::pow(c.n, 1.0 / nu);
            for (std::size_t wi = 0; wi < data.widths.size(); ++wi) {
                c.widths.push_back(data.widths[wi]);
                c.rescaled.push_back(f * data.widths[wi]);
                c.distance.push_back(data.distance(static_cast<Eigen::Index>(si), static_cast<Eigen::Index>(wi)));
            }
            r.curves.push_back(std::move(c));
        }
        r.score = collapse_score(r.curves);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace glassmem::stats
