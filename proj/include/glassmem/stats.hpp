#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "glassmem/connectivity.hpp"
#include "glassmem/random.hpp"

// Statistics of the confocal coupling ensemble, spectral diagnostics, and
// distribution distances. Widths are in units of the waist w0.
namespace glassmem::stats {

double coupling_pdf(double j, double width);
double coupling_cdf(double j, double width);

struct Moments {
    double mean;
    double std;
};

Moments coupling_moments(double width);
// <J_ij J_jk> for a shared vertex j.
double coupling_correlation(double width);
double negative_fraction(double width);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// P(J_ij J_jk J_ki < 0) over random position triples.
Estimate frustration_probability(double width, std::size_t n_triples, Rng& rng);

// Sample J = cos(2 r_i.r_j) over independent position pairs.
std::vector<double> sample_couplings(double width, std::size_t n_pairs, Rng& rng);

struct CouplingMonteCarlo {
    Estimate mean;
    Estimate std;
    Estimate correlation;
    Estimate negative_fraction;
};

// Pair statistics from n independent pairs, correlation from n independent triples.
CouplingMonteCarlo coupling_monte_carlo(double width, std::size_t n, Rng& rng);

struct Histogram {
    std::vector<double> edges;
    std::vector<double> densities;
    std::size_t count = 0; // samples that fell inside the edges

    static Histogram uniform_edges(double lo, double hi, std::size_t bins);
    // Densities normalized over the in-range samples.
    static Histogram from_samples(const std::vector<double>& samples, double lo, double hi, std::size_t bins);
    // Bin averages of a density given its CDF.
    static Histogram from_cdf(const std::function<double(double)>& cdf, const std::vector<double>& edges);

    std::size_t bins() const { return densities.size(); }
    double width(std::size_t k) const { return edges[k + 1] - edges[k]; }
    double mass() const;
    void validate() const;
};

// Hellinger distance sqrt(1/2 int (sqrt p - sqrt q)^2), on the union of both grids.
double hellinger(const Histogram& p, const Histogram& q);

double semicircle_density(double x);
double semicircle_cdf(double x);
double wigner_surmise(double s);
double wigner_surmise_cdf(double s);

// sup |F_n - F| of the empirical distribution of `samples`.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

inline constexpr double kSpectrumLo = -3.5;
inline constexpr double kSpectrumHi = 3.5;
inline constexpr std::size_t kSpectrumBins = 101;
inline constexpr int kUnfoldWindow = 21;

struct SpectralSummary {
    Eigen::VectorXd eigenvalues; // sorted, unit variance
    std::vector<double> spacings; // unfolded, mean 1
    bool degenerate = false;      // spectrum has no spread; spacings left empty
};

// Spectrum of the zero-diagonal matrix.
SpectralSummary spectral_summary(const connectivity::CouplingMatrix& coupling);

// Eigenvalue histogram with the standard binning, and its semicircle reference.
Histogram eigenvalue_histogram(const std::vector<double>& eigenvalues);
Histogram semicircle_histogram();
double semicircle_hellinger(const std::vector<double>& eigenvalues);

struct CollapseCurve {
    double n = 0.0;
    std::vector<double> widths;
    std::vector<double> rescaled; // N^{1/nu} w
    std::vector<double> distance; // Hellinger to the semicircle
};

struct CollapseResult {
    double nu = 0.0;
    std::vector<CollapseCurve> curves;
    double score = 0.0;
};

// Mean pairwise RMS distance between curves on a common grid over the shared range.
double collapse_score(const std::vector<CollapseCurve>& curves);

// Raw Hellinger distances per (size, width), averaged over `trials` confocal realizations.
struct CollapseData {
    std::vector<double> sizes;
    std::vector<double> widths;
    Eigen::MatrixXd distance; // sizes x widths
};

CollapseData collapse_data(const std::vector<double>& widths, const std::vector<std::size_t>& sizes,
                           std::size_t trials, std::uint64_t base_seed, unsigned workers = 1);

std::vector<CollapseResult> hellinger_collapse(const CollapseData& data,
                                               const std::vector<double>& nus = {-3.0, -4.0, -5.0});

} // namespace glassmem::stats
