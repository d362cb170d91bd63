// Acceptance run: one PASS/FAIL line per criterion. Exits 0 when every
// criterion was evaluated (whatever the verdicts); --strict makes any FAIL
// exit 1. --only=3,7 restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "oracles.hpp"
#include "glassmem/cavity.hpp"
#include "glassmem/connectivity.hpp"
#include "glassmem/experiments.hpp"
#include "glassmem/landscape.hpp"
#include "glassmem/memory.hpp"
#include "glassmem/parallel.hpp"
#include "glassmem/stats.hpp"

using namespace glassmem;
namespace ex = glassmem::experiments;
using landscape::DynamicsKind;
using landscape::ExternalField;
using landscape::SpinState;

namespace {

constexpr std::uint64_t kBase = 20260101;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::uint64_t seed(int criterion, std::uint64_t index)
{
    return fold_seed(derive_seed(kBase, "acceptance-" + std::to_string(criterion), index));
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- 1
Verdict coupling_law()
{
    Verdict v{true, ""};
    int k = 0;
    for (double w : {0.5, 1.0, 4.0}) {
        const auto law = ex::coupling_law(w, 1000000, 100, seed(1, k++));
        v.pass = v.pass && law.hellinger < 0.02;
        v.detail += "H(w=" + fmt("%g", w) + ")=" + fmt("%.4f", law.hellinger) + " ";
    }
    return v;
}

// ---- 2
Verdict moments()
{
    Verdict v{true, ""};
    double worst = 0;
    int k = 0;
    for (double w : {0.5, 1.0, 2.0, 4.0}) {
        const auto m = ex::moment_check(w, 1000000, seed(2, k++));
        for (double z : {m.z_mean, m.z_std, m.z_correlation, m.z_negative}) worst = std::max(worst, std::abs(z));
        v.detail += "w=" + fmt("%g", w) + ":z=(" + fmt("%.2f", m.z_mean) + "," + fmt("%.2f", m.z_std) + "," +
                    fmt("%.2f", m.z_correlation) + "," + fmt("%.2f", m.z_negative) + ") ";
    }
    v.pass = worst < 3.0;
    v.detail = "max|z|=" + fmt("%.2f", worst) + " " + v.detail;
    return v;
}

// ---- 3
Verdict transition()
{
    std::vector<double> widths;
    for (int k = 0; k < 12; ++k) widths.push_back(0.5 + 0.3 * k / 11.0);
    const auto rows = ex::metastable_grid({100, 200, 400}, widths, 10, 500, seed(3, 0), workers());
    try {
        const auto fit = ex::fit_metastable_rows(rows);
        return {fit.w_am >= 0.62 && fit.w_am <= 0.72,
                "w_AM=" + fmt("%.4f", fit.w_am) + " nu=" + fmt("%.3f", fit.nu) + " A=" + fmt("%.3f", fit.a) +
                    " B=" + fmt("%.3f", fit.b)};
    } catch (const std::exception& e) {
        return {false, std::string("fit failed: ") + e.what()};
    }
}

// ---- 4
Verdict random_matrix()
{
    const auto c = ex::confocal_spectrum(1000, 12.0, 10, seed(4, 0), workers());
    const auto s = ex::sk_spectrum(1000, 10, seed(4, 1), workers());
    const bool ok = c.hellinger < 0.05 && s.hellinger < 0.02 && c.ks < 0.03 && s.ks < 0.03;
    return {ok, "confocal H=" + fmt("%.4f", c.hellinger) + " KS=" + fmt("%.4f", c.ks) +
                    "; SK H=" + fmt("%.4f", s.hellinger) + " KS=" + fmt("%.4f", s.ks)};
}

// ---- 5
Verdict collapse()
{
    std::vector<double> widths;
    for (int k = 0; k < 12; ++k) widths.push_back(0.5 * std::pow(24.0, k / 11.0));
    const std::vector<double> coarse{-3.0, -4.0, -5.0};
    const std::vector<double> fine{-2.5, -3.0, -3.25, -3.5, -3.75, -4.0, -4.5, -5.0};
    std::vector<double> mean(coarse.size(), 0.0), mean_fine(fine.size(), 0.0);
    std::string winners;
    const int repeats = 4;
    for (int r = 0; r < repeats; ++r) {
        const auto data = stats::collapse_data(widths, {100, 300, 1000}, 4, seed(5, r), workers());
        const auto res = stats::hellinger_collapse(data, coarse);
        std::size_t best = 0;
        for (std::size_t k = 0; k < res.size(); ++k) {
            mean[k] += res[k].score / repeats;
            if (res[k].score < res[best].score) best = k;
        }
        winners += fmt("%g", coarse[best]) + (r + 1 < repeats ? "," : "");
        const auto rf = stats::hellinger_collapse(data, fine);
        for (std::size_t k = 0; k < rf.size(); ++k) mean_fine[k] += rf[k].score / repeats;
    }
    const auto best = static_cast<std::size_t>(std::min_element(mean.begin(), mean.end()) - mean.begin());
    const auto best_fine =
        static_cast<std::size_t>(std::min_element(mean_fine.begin(), mean_fine.end()) - mean_fine.begin());
    std::string d = "mean score nu=-3:" + fmt("%.4f", mean[0]) + " -4:" + fmt("%.4f", mean[1]) +
                    " -5:" + fmt("%.4f", mean[2]) + "; per-seed winners " + winners +
                    "; finer scan minimum at nu=" + fmt("%g", fine[best_fine]);
    return {coarse[best] == -4.0, d};
}

// ---- 6
Verdict thermometry()
{
    const cavity::CavityParams p;
    double worst = 0;
    for (const auto& pt : ex::thermometry(p, 50)) worst = std::max(worst, std::abs(pt.log_ratio / pt.expected - 1));
    double worst_series = 0, worst_peak = 0;
    for (int k = 0; k < 20; ++k) {
        const double de = -3.2 * std::abs(p.delta_c) + 5.0 * std::abs(p.delta_c) * k / 19.0;
        const double q = oracle::cavity_rate_quadrature(de, p);
        worst_series = std::max(worst_series, std::abs(cavity::lorentzian_series(de, p) / q - 1));
        const cavity::ClassicalOhmic b;
        const double e = 0.5 * k / 19.0;
        const double qp = oracle::classical_peak_quadrature(e, p, b);
        worst_peak = std::max(worst_peak, std::abs(cavity::classical_peak(e, p, b) / qp - 1));
    }
    return {worst < 0.02 && worst_series < 1e-6 && worst_peak < 1e-6,
            "detailed balance max rel err " + fmt("%.4f", worst) + "; series vs quadrature " +
                fmt("%.2e", worst_series) + "; ohmic peak vs quadrature " + fmt("%.2e", worst_peak)};
}

// ---- 7 (also feeds the mean-field confinement check of 12)
double g_max_abs_m = 0.0;

Verdict dynamics()
{
    ex::ScenarioOptions so; // N = 20, S = 1e3, w = 1.5, five misaligned
    const std::size_t count = 20;
    struct Out {
        bool agree, monotone, steps;
        double max_m;
    };
    const auto res = parallel_map(count, workers(), [&](std::size_t k) {
        const auto s = seed(7, k);
        const auto sc = ex::dynamics_scenario(so, s);
        const auto o = ex::run_dynamics(sc, s);
        double mx = 0;
        for (const auto& m : o.trajectory.m) mx = std::max(mx, m.cwiseAbs().maxCoeff());
        return Out{o.meanfield_match && o.unravel_match, o.energy_rises == 0,
                   o.sign_changes >= 1 && o.energy_drop > 0, mx};
    });
    std::size_t agree = 0, monotone = 0, steps = 0;
    for (const auto& r : res) {
        agree += r.agree;
        monotone += r.monotone;
        steps += r.steps;
        g_max_abs_m = std::max(g_max_abs_m, r.max_m);
    }
    return {agree >= 19 && monotone == count && steps == count,
            "three-way agreement " + std::to_string(agree) + "/20; monotone ODE energy " + std::to_string(monotone) +
                "/20; stepped descent " + std::to_string(steps) + "/20"};
}

// ---- 8
Verdict sd_advantage()
{
    Verdict v{true, ""};
    int k = 0;
    for (double r : {0.2, 0.4, 0.6}) {
        const auto b = ex::pseudoinverse_basins(100, r, 20, 100, seed(8, k++), workers());
        v.pass = v.pass && b.sd.mean > b.zero_tmh.mean;
        v.detail += "P/N=" + fmt("%g", r) + " SD " + fmt("%.2f", b.sd.mean) + " vs 0TMH " +
                    fmt("%.2f", b.zero_tmh.mean) + "; ";
    }
    const auto lo = ex::hebbian_overlap(100, 0.05, 10, seed(8, 10), workers());
    const auto hi = ex::hebbian_overlap(100, 0.5, 10, seed(8, 11), workers());
    // "visibly degraded": below 0.9
    v.pass = v.pass && lo.mean > 0.97 && hi.mean < 0.9;
    v.detail += "Hebbian overlap " + fmt("%.4f", lo.mean) + " at 0.05, " + fmt("%.4f", hi.mean) + " at 0.5";
    return v;
}

// ---- 9
Verdict sk_extensive()
{
    std::vector<double> ns, sd, tmh;
    int k = 0;
    for (std::size_t n : {100, 200, 400}) {
        const auto m = ex::sk_basins(n, 10, 100, 100, seed(9, k++), workers());
        ns.push_back(static_cast<double>(n));
        sd.push_back(m.sd.mean);
        tmh.push_back(m.zero_tmh.mean);
    }
    const auto fit = ex::fit_line(ns, sd);
    const bool decreasing = tmh[0] > tmh[1] && tmh[1] > tmh[2];
    return {fit.slope >= 0.008 && fit.slope <= 0.020 && decreasing,
            "SD slope " + fmt("%.4f", fit.slope) + " (basins " + fmt("%.2f", sd[0]) + "," + fmt("%.2f", sd[1]) + "," +
                fmt("%.2f", sd[2]) + "); 0TMH " + fmt("%.3f", tmh[0]) + "," + fmt("%.3f", tmh[1]) + "," +
                fmt("%.3f", tmh[2])};
}

// ---- 10
Verdict capacity()
{
    const std::vector<double> ratios{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    Rng rng = make_rng(seed(10, 0));
    memory::CapacityOptions opt;
    opt.workers = workers();
    const auto rows = memory::capacity_sweep(200, ratios, rng, opt);
    bool exact = true, big = true;
    std::string d = "basins";
    for (const auto& r : rows) {
        exact = exact && r.exact;
        if (r.ratio <= 0.4 + 1e-12) big = big && r.mean_basin > 20.0;
        d += " " + fmt("%g", r.ratio) + ":" + fmt("%.1f", r.mean_basin);
    }
    const bool full = rows.back().mean_basin > 0;
    d += std::string("; encoder exact at all P: ") + (exact ? "yes" : "no") + "; >0.1N for P/N<=0.4: " +
         (big ? "yes" : "no") + "; >0 at P=N: " + (full ? "yes" : "no");
    return {exact && big && full, d};
}

// ---- 11
Verdict chaos()
{
    bool ok = true;
    std::string d;
    int k = 0;
    for (std::size_t n : {50, 100}) {
        std::vector<double> ov;
        d += "N=" + std::to_string(n) + ":";
        for (double w : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            const auto r = ex::chaos_point(n, w, 10, 10, memory::NoiseModel::standard(static_cast<Eigen::Index>(n)),
                                           seed(11, k++), workers());
            if (w < 1.0) ok = ok && r.mean_overlap > 0.98;
            if (w >= 0.5) ov.push_back(r.mean_overlap);
            d += " " + fmt("%.3f", r.mean_overlap);
        }
        for (std::size_t i = 1; i < ov.size(); ++i) ok = ok && ov[i] <= ov[i - 1];
        d += "; ";
    }
    return {ok, "overlap at w=0.25,0.5,1,2,4 " + d};
}

// ---- 12
std::string key(const SpinState& s)
{
    std::string k;
    for (Eigen::Index i = 0; i < s.size(); ++i) k += s[i] > 0 ? '+' : '-';
    return k;
}

Verdict properties()
{
    std::vector<std::string> failed;
    auto require = [&](bool ok, const char* what) {
        if (!ok) failed.emplace_back(what);
    };

    // incremental vs full energy
    {
        const auto j = connectivity::confocal_matrix(connectivity::sample_layout(80, 1.2, seed(12, 0)));
        Rng rng = make_rng(seed(12, 1));
        landscape::Relaxer r(j, SpinState::random(80, rng));
        double e = r.energy(), worst = 0;
        std::uniform_int_distribution<Eigen::Index> pick(0, 79);
        for (int t = 0; t < 2000; ++t) {
            const auto i = pick(rng);
            e += r.cost(i);
            r.flip(i);
            worst = std::max(worst, std::abs(e - landscape::energy(r.state(), j)) / std::max(1.0, std::abs(e)));
        }
        require(worst < 1e-10, "incremental energy");
    }
    // SD determinism and worker invariance
    {
        const auto a = ex::sk_basins(60, 2, 10, 20, seed(12, 2), 1);
        const auto b = ex::sk_basins(60, 2, 10, 20, seed(12, 2), 4);
        require(a.sd.values == b.sd.values && a.zero_tmh.values == b.zero_tmh.values, "worker invariance");
        const auto j = connectivity::sk_matrix(60, 1.0, seed(12, 3));
        Rng r1 = make_rng(seed(12, 4)), r2 = make_rng(seed(12, 4));
        const auto s = SpinState::random(60, r1);
        SpinState s2 = SpinState::random(60, r2);
        const auto t1 = landscape::relax(s, j, ExternalField::zeros(60), DynamicsKind::sd(), r1);
        const auto t2 = landscape::relax(s2, j, ExternalField::zeros(60), DynamicsKind::sd(), r2);
        require(t1.final_state == t2.final_state && t1.steps.size() == t2.steps.size(), "SD determinism");
        // Z2 equivariance
        const auto t3 = landscape::relax(-s, j, ExternalField::zeros(60), DynamicsKind::sd(), r1);
        require(t3.final_state == -t1.final_state && t3.steps.size() == t1.steps.size(), "Z2 equivariance");
    }
    // brute-force fixed points for N <= 12
    for (int inst = 0; inst < 3; ++inst) {
        const Eigen::Index n = 10 + inst;
        const auto j = inst == 0 ? connectivity::sk_matrix(n, 1.0, seed(12, 10))
                                 : connectivity::confocal_matrix(connectivity::sample_layout(n, 1.5, seed(12, 10 + inst)));
        const auto h = ExternalField::zeros(n);
        std::set<std::string> brute, via_sd, via_tmh;
        Rng rng = make_rng(seed(12, 20 + inst));
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
            std::vector<int> v(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = (bits >> i) & 1 ? 1 : -1;
            const SpinState s(v);
            bool fixed = true;
            for (Eigen::Index i = 0; i < n && fixed; ++i) fixed = landscape::flip_cost(s, j, h, i) >= -1e-12;
            if (fixed) brute.insert(key(s));
            via_sd.insert(key(landscape::relax_state(s, j, h, DynamicsKind::sd(), rng)));
            via_tmh.insert(key(landscape::relax_state(s, j, h, DynamicsKind::zero_tmh(), rng)));
        }
        require(brute == via_sd && brute == via_tmh, "brute-force fixed points");
    }
    // mean-field confinement, from the criterion-7 trajectories
    require(g_max_abs_m > 0 && g_max_abs_m <= 1.0, "mean-field confinement");
    // kernels nonnegative
    {
        const cavity::CavityParams p;
        bool ok = true;
        for (int k = 0; k <= 4000; ++k) {
            const double de = -60 + 100.0 * k / 4000.0;
            ok = ok && cavity::rate_confocal(de, p) >= 0 && cavity::rate_confocal(de, p, cavity::ClassicalOhmic{}) >= 0 &&
                 cavity::rate_quantum_ohmic(de, p, cavity::QuantumOhmic{2.0, 0.03}) >= 0 &&
                 cavity::glauber_rate(de, 3.0) >= 0 && cavity::metropolis_rate(de, 3.0) >= 0;
        }
        require(ok, "nonnegative kernels");
    }
    // quantum bath maximum
    for (double a : {2.0, 5.0}) {
        const cavity::QuantumOhmic b{a, 0.05};
        double best = -1, arg = 0;
        for (int k = 1; k <= 200000; ++k) {
            const double de = -2.0 * k / 200000.0;
            const double v = cavity::quantum_peak(de, b);
            if (v > best) best = v, arg = de;
        }
        require(std::abs(std::abs(arg) - (a - 1) * 0.05) < 1e-4, "quantum bath maximum");
    }

    std::string d = failed.empty() ? "all suites hold" : "failed:";
    for (const auto& f : failed) d += " " + f;
    d += "; max |m| on mean-field trajectories " + fmt("%.6f", g_max_abs_m);
    return {failed.empty(), d};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Verdict()> run;
};

} // namespace

int main(int argc, char** argv)
{
    bool strict = false;
    std::set<int> only;
    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg == "--strict") {
            strict = true;
        } else if (arg.rfind("--only=", 0) == 0) {
            std::stringstream ss(arg.substr(7));
            for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
        } else {
            std::fprintf(stderr, "usage: %s [--strict] [--only=1,2,...]\n", argv[0]);
            return 2;
        }
    }
    // 12 reads the trajectories produced by 7
    if (only.count(12) && !only.count(7)) only.insert(7);

    const std::vector<Criterion> criteria{
        {1, "coupling law", 60, coupling_law},
        {2, "moments and correlations", 60, moments},
        {3, "ferromagnet to memory transition", 600, transition},
        {4, "random-matrix limit", 300, random_matrix},
        {5, "collapse exponent", 600, collapse},
        {6, "rate-kernel thermometry", 60, thermometry},
        {7, "dynamics agreement", 300, dynamics},
        {8, "SD basin advantage", 600, sd_advantage},
        {9, "SK extensivity", 900, sk_extensive},
        {10, "encoded capacity", 900, capacity},
        {11, "weight chaos", 600, chaos},
        {12, "property suites", 120, properties},
    };

    std::printf("acceptance: %u worker thread(s)\n", workers());
    int fails = 0, errors = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
            ++errors;
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs < c.budget_s;
        const bool pass = v.pass && in_budget;
        if (!pass) ++fails;
        std::printf("criterion %2d %s: %s | %s | %.1f s (budget %.0f s%s)\n", c.id, c.name, pass ? "PASS" : "FAIL",
                    v.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", exceeded");
        std::fflush(stdout);
    }
    std::printf("acceptance: %d failing criterion(s)\n", fails);
    if (errors > 0) return 3;
    return strict && fails > 0 ? 1 : 0;
}
