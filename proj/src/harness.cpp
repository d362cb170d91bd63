#include "glassmem/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "glassmem/errors.hpp"
#include "glassmem/io.hpp"
#include "glassmem/parallel.hpp"

#ifndef GLASSMEM_VERSION
#define GLASSMEM_VERSION "unknown"
#endif

namespace glassmem::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using config::ExperimentConfig;
using experiments::SeedLog;
using io::CsvWriter;

namespace {

constexpr std::size_t kTrajectoryRows = 5000;

struct Context {
    const ExperimentConfig& cfg;
    fs::path dir;
    SeedLog log;
    std::vector<std::string> files;

    fs::path file(const std::string& name)
    {
        files.push_back(name);
        return dir / name;
    }

    // Sub-seed for part `index` of this experiment.
    std::uint64_t seed(std::uint64_t index) { return fold_seed(log.derive(cfg.seed, cfg.experiment, index)); }
};

void write_histogram_pair(CsvWriter& w, const char* label, double key, const stats::Histogram& a,
                          const stats::Histogram& b)
{
    for (std::size_t k = 0; k < a.bins(); ++k) {
        w.field(label).field(key).field(a.edges[k]).field(a.edges[k + 1]).field(a.densities[k]).field(b.densities[k]);
        w.end_row();
    }
}

void run_couplings(Context& ctx)
{
    const auto& c = ctx.cfg;
    CsvWriter hist(ctx.file("coupling_histograms.csv"),
                   {"series", "width", "bin_lo", "bin_hi", "density_sampled", "density_exact"});
    CsvWriter sum(ctx.file("coupling_moments.csv"),
                  {"width", "hellinger", "mean_mc", "mean_se", "mean_exact", "std_mc", "std_se", "std_exact",
                   "correlation_mc", "correlation_se", "correlation_exact", "negative_mc", "negative_se",
                   "negative_exact"});
    CsvWriter fr(ctx.file("frustration.csv"), {"width", "probability", "std_error"});
    for (std::size_t k = 0; k < c.grid.widths.size(); ++k) {
        const double w = c.grid.widths[k];
        const auto law = experiments::coupling_law(w, c.trials.samples, c.trials.bins, ctx.seed(3 * k), &ctx.log);
        write_histogram_pair(hist, "coupling", w, law.sampled, law.exact);

        const auto mc = experiments::moment_check(w, c.trials.samples, ctx.seed(3 * k + 1), &ctx.log);
        sum.field(w).field(law.hellinger);
        sum.field(mc.sampled.mean.value).field(mc.sampled.mean.std_error).field(mc.exact.mean);
        sum.field(mc.sampled.std.value).field(mc.sampled.std.std_error).field(mc.exact.std);
        sum.field(mc.sampled.correlation.value).field(mc.sampled.correlation.std_error).field(mc.correlation);
        sum.field(mc.sampled.negative_fraction.value)
            .field(mc.sampled.negative_fraction.std_error)
            .field(mc.negative_fraction);
        sum.end_row();

        Rng rng = make_rng(ctx.seed(3 * k + 2));
        const auto f = stats::frustration_probability(w, c.trials.samples, rng);
        fr.field(w).field(f.value).field(f.std_error);
        fr.end_row();
    }
    hist.close();
    sum.close();
    fr.close();
}

void run_metastable(Context& ctx)
{
    const auto& c = ctx.cfg;
    const auto rows = experiments::metastable_grid(c.grid.sizes, c.grid.widths, c.trials.realizations,
                                                   c.trials.seeds, ctx.seed(0), c.workers, &ctx.log);
    CsvWriter w(ctx.file("metastable_counts.csv"), {"n", "width", "mean_count", "std_count", "realizations"});
    for (const auto& r : rows) {
        w.field(r.n).field(r.width).field(r.mean_count).field(r.std_count).field(r.realizations);
        w.end_row();
    }
    w.close();

    CsvWriter f(ctx.file("metastable_fit.csv"), {"status", "a", "b", "nu", "w_am", "residual", "iterations"});
    try {
        const auto fit = experiments::fit_metastable_rows(rows);
        f.field("ok").field(fit.a).field(fit.b).field(fit.nu).field(fit.w_am).field(fit.residual).field(fit.iterations);
    } catch (const FitError& e) {
        const double nan = std::nan("");
        f.field(e.what()).field(nan).field(nan).field(nan).field(nan).field(e.residual()).field(0);
    }
    f.end_row();
    f.close();

    // One relaxation under the configured dynamics, for inspection.
    const auto n = static_cast<Eigen::Index>(c.grid.sizes.front());
    const auto layout = connectivity::sample_layout(n, c.grid.widths.front(), ctx.seed(1));
    const auto j = connectivity::confocal_matrix(layout);
    Rng rng = make_rng(ctx.seed(2));
    const auto start = landscape::SpinState::random(n, rng);
    const auto trace = landscape::relax(start, j, landscape::ExternalField::zeros(n),
                                        config::dynamics_kind(c.dynamics), landscape::default_max_steps(n), rng);
    io::write_gmj1(ctx.file("example_coupling.gmj1"), j);
    io::write_trace_csv(ctx.file("example_trace.csv"), trace);
}

void write_spectrum(CsvWriter& eig, CsvWriter& sp, CsvWriter& sum, const char* model, std::size_t n, double width,
                    std::size_t realizations, const experiments::SpectrumCheck& s)
{
    const auto h = stats::eigenvalue_histogram(s.eigenvalues);
    const auto ref = stats::semicircle_histogram();
    write_histogram_pair(eig, model, width, h, ref);

    const auto spacing = stats::Histogram::from_samples(s.spacings, 0.0, 4.0, 40);
    const auto surmise = stats::Histogram::from_cdf(stats::wigner_surmise_cdf, spacing.edges);
    write_histogram_pair(sp, model, width, spacing, surmise);

    sum.field(model).field(n).field(width).field(realizations).field(s.hellinger).field(s.ks);
    sum.end_row();
}

void run_spectra(Context& ctx)
{
    const auto& c = ctx.cfg;
    const std::size_t n = c.spectrum.n;
    const auto confocal =
        experiments::confocal_spectrum(n, c.spectrum.width, c.trials.realizations, ctx.seed(0), c.workers, &ctx.log);
    const auto sk = experiments::sk_spectrum(n, c.trials.realizations, ctx.seed(1), c.workers, &ctx.log);

    CsvWriter eig(ctx.file("spectrum_eigenvalues.csv"),
                  {"model", "width", "bin_lo", "bin_hi", "density", "semicircle"});
    CsvWriter sp(ctx.file("spectrum_spacings.csv"), {"model", "width", "bin_lo", "bin_hi", "density", "surmise"});
    CsvWriter sum(ctx.file("spectrum_summary.csv"), {"model", "n", "width", "realizations", "hellinger", "ks"});
    write_spectrum(eig, sp, sum, "confocal", n, c.spectrum.width, c.trials.realizations, confocal);
    write_spectrum(eig, sp, sum, "sk", n, 0.0, c.trials.realizations, sk);
    eig.close();
    sp.close();
    sum.close();

    const auto data =
        stats::collapse_data(c.grid.widths, c.grid.sizes, c.spectrum.collapse_trials, ctx.seed(2), c.workers);
    const auto results = stats::hellinger_collapse(data, c.spectrum.nus);
    CsvWriter cur(ctx.file("collapse_curves.csv"), {"nu", "n", "width", "rescaled_width", "hellinger"});
    CsvWriter sc(ctx.file("collapse_scores.csv"), {"nu", "score"});
    for (const auto& r : results) {
        for (const auto& curve : r.curves)
            for (std::size_t k = 0; k < curve.widths.size(); ++k) {
                cur.field(r.nu).field(curve.n).field(curve.widths[k]).field(curve.rescaled[k]).field(curve.distance[k]);
                cur.end_row();
            }
        sc.field(r.nu).field(r.score);
        sc.end_row();
    }
    cur.close();
    sc.close();
}

void run_dynamics(Context& ctx)
{
    const auto& c = ctx.cfg;
    experiments::ScenarioOptions so;
    so.n = c.scenario.n;
    so.spin = c.scenario.spin;
    so.width = c.scenario.width;
    so.misaligned = c.scenario.misaligned;
    so.diagonal = c.scenario.diagonal;
    so.params = c.cavity.params();
    experiments::DynamicsOptions dopt;
    dopt.t_max = c.scenario.t_max_us;
    dopt.rise_tolerance = c.scenario.rise_tolerance;

    const std::size_t count = c.trials.realizations;
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t k = 0; k < count; ++k) seeds[k] = ctx.seed(k);
    struct Result {
        experiments::DynamicsScenario scenario;
        experiments::DynamicsOutcome outcome;
    };
    auto results = parallel_map(count, c.workers, [&](std::size_t k) {
        auto sc = experiments::dynamics_scenario(so, seeds[k]);
        auto out = experiments::run_dynamics(sc, seeds[k], dopt);
        if (k > 0) {
            // Only the first seed's traces are written.
            out.trajectory = {};
            out.events.events.clear();
            out.energy.clear();
        }
        return Result{std::move(sc), std::move(out)};
    });

    CsvWriter agree(ctx.file("dynamics_agreement.csv"),
                    {"seed_index", "meanfield_match", "unravel_match", "settled", "t_settle", "energy_rises",
                     "max_energy_rise", "energy_drop", "sign_changes", "events"});
    for (std::size_t k = 0; k < count; ++k) {
        const auto& o = results[k].outcome;
        agree.field(k).field(int(o.meanfield_match)).field(int(o.unravel_match)).field(int(o.settled));
        agree.field(o.t_settle).field(o.energy_rises).field(o.max_energy_rise).field(o.energy_drop);
        agree.field(o.sign_changes).field(k == 0 ? o.events.events.size() : std::size_t{0});
        agree.end_row();
    }
    agree.close();

    // The integrator takes ~1e5 steps; write an evenly thinned copy.
    const auto& first = results.front();
    const auto& full = first.outcome.trajectory;
    const std::size_t stride = std::max<std::size_t>(1, (full.size() + kTrajectoryRows - 1) / kTrajectoryRows);
    cavity::Trajectory thin;
    CsvWriter en(ctx.file("dynamics_energy.csv"), {"time", "energy"});
    for (std::size_t k = 0; k < full.size(); ++k) {
        if (k % stride != 0 && k + 1 != full.size()) continue;
        thin.times.push_back(full.times[k]);
        thin.m.push_back(full.m[k]);
        en.field(full.times[k]).field(first.outcome.energy[k]);
        en.end_row();
    }
    en.close();
    io::write_trajectory_csv(ctx.file("dynamics_trajectory.csv"), thin);
    io::write_events_csv(ctx.file("dynamics_events.csv"), first.outcome.events);
    CsvWriter ft(ctx.file("dynamics_flip_times.csv"), {"index", "misaligned", "predicted_t0", "target_sign"});
    const auto& sc = first.scenario;
    for (Eigen::Index i = 0; i < sc.initial.size(); ++i) {
        const bool mis = std::find(sc.misaligned.begin(), sc.misaligned.end(), i) != sc.misaligned.end();
        ft.field(static_cast<long long>(i)).field(int(mis)).field(first.outcome.predicted_flip_times[i]);
        ft.field(sc.sd_target[i]);
        ft.end_row();
    }
    ft.close();
    io::write_gmj1(ctx.file("dynamics_coupling.gmj1"), sc.coupling);
}

void basin_row(CsvWriter& w, double ratio, const char* model, const char* dynamics,
               const experiments::BasinStats& b)
{
    w.field(ratio).field(model).field(dynamics).field(b.mean).field(b.std).field(b.samples);
    w.end_row();
}

void run_hopfield(Context& ctx)
{
    const auto& c = ctx.cfg;
    const std::size_t n = c.grid.sizes.front();
    CsvWriter basins(ctx.file("hopfield_basins.csv"),
                     {"ratio", "model", "dynamics", "mean_basin", "std_basin", "samples"});
    CsvWriter overlap(ctx.file("hebbian_overlap.csv"), {"ratio", "mean_overlap", "std_overlap", "samples"});
    for (std::size_t k = 0; k < c.grid.ratios.size(); ++k) {
        const double ratio = c.grid.ratios[k];
        const auto pi = experiments::pseudoinverse_basins(n, ratio, c.trials.samples, c.trials.per_distance,
                                                          ctx.seed(3 * k), c.workers, &ctx.log);
        basin_row(basins, ratio, "pseudoinverse", "sd", pi.sd);
        basin_row(basins, ratio, "pseudoinverse", "0tmh", pi.zero_tmh);
        const auto hb = experiments::hebbian_basins(n, ratio, c.trials.samples, c.trials.per_distance,
                                                    ctx.seed(3 * k + 1), c.workers, &ctx.log);
        basin_row(basins, ratio, "hebbian", "sd", hb);
        const auto ov =
            experiments::hebbian_overlap(n, ratio, c.trials.realizations, ctx.seed(3 * k + 2), c.workers, &ctx.log);
        overlap.field(ratio).field(ov.mean).field(ov.std).field(ov.overlaps.size());
        overlap.end_row();
    }
    basins.close();
    overlap.close();

    // Recall curve of one stored pattern, under the configured dynamics.
    const auto ne = static_cast<Eigen::Index>(n);
    Rng rng = make_rng(ctx.seed(3 * c.grid.ratios.size()));
    const auto p = std::max<Eigen::Index>(1, std::llround(c.grid.ratios.front() * static_cast<double>(n)));
    const auto patterns = connectivity::PatternSet::random(p, ne, rng);
    const auto j = connectivity::pseudoinverse_matrix(patterns);
    const auto report = memory::recall_curve(landscape::SpinState(patterns.pattern(0)), j, landscape::ExternalField::zeros(ne),
                                             config::dynamics_kind(c.dynamics), n / 2, rng,
                                             {c.trials.per_distance, false});
    io::write_recall_csv(ctx.file("recall_example.csv"), report);
}

void write_minima(CsvWriter& w, const experiments::MinimaBasins& m)
{
    for (const auto* kind : {"sd", "0tmh"}) {
        const auto& b = std::string(kind) == "sd" ? m.sd : m.zero_tmh;
        w.field(m.n).field(m.width).field(kind).field(b.mean).field(b.std).field(b.samples);
        w.end_row();
    }
}

void run_sk(Context& ctx)
{
    const auto& c = ctx.cfg;
    CsvWriter w(ctx.file("sk_basins.csv"), {"n", "width", "dynamics", "mean_basin", "std_basin", "samples"});
    std::vector<double> ns, sd, tmh;
    for (std::size_t k = 0; k < c.grid.sizes.size(); ++k) {
        const auto m = experiments::sk_basins(c.grid.sizes[k], c.trials.realizations, c.trials.seeds,
                                              c.trials.per_distance, ctx.seed(k), c.workers, &ctx.log);
        write_minima(w, m);
        ns.push_back(static_cast<double>(m.n));
        sd.push_back(m.sd.mean);
        tmh.push_back(m.zero_tmh.mean);
    }
    w.close();
    CsvWriter f(ctx.file("sk_basin_fit.csv"), {"dynamics", "slope", "intercept"});
    if (ns.size() >= 2) {
        const auto a = experiments::fit_line(ns, sd);
        const auto b = experiments::fit_line(ns, tmh);
        f.field("sd").field(a.slope).field(a.intercept);
        f.end_row();
        f.field("0tmh").field(b.slope).field(b.intercept);
        f.end_row();
    }
    f.close();
}

void run_ccqed(Context& ctx)
{
    const auto& c = ctx.cfg;
    CsvWriter w(ctx.file("ccqed_basins.csv"), {"n", "width", "dynamics", "mean_basin", "std_basin", "samples"});
    std::size_t part = 0;
    for (auto n : c.grid.sizes)
        for (double width : c.grid.widths) {
            const auto m = experiments::confocal_basins(n, width, c.trials.realizations, c.trials.seeds,
                                                        c.trials.per_distance, ctx.seed(part++), c.workers, &ctx.log);
            write_minima(w, m);
        }
    w.close();
}

void run_capacity(Context& ctx)
{
    const auto& c = ctx.cfg;
    const auto n = static_cast<Eigen::Index>(c.grid.sizes.front());
    memory::CapacityOptions opt;
    opt.width = c.memory.width;
    opt.lambda = c.memory.lambda_per_n * static_cast<double>(n);
    opt.seed_factor = c.memory.seed_factor;
    opt.recall = {c.trials.per_distance, true};
    opt.workers = c.workers;
    Rng rng = make_rng(ctx.seed(0));
    const auto rows = memory::capacity_sweep(n, c.grid.ratios, rng, opt);
    io::write_sweep_csv(ctx.file("capacity_sweep.csv"), rows);

    CsvWriter d(ctx.file("capacity_codec.csv"), {"ratio", "n_patterns", "exact", "margin", "decode_failures"});
    for (const auto& r : rows) {
        d.field(r.ratio).field(r.n_patterns).field(int(r.exact)).field(r.margin).field(r.decode_failures);
        d.end_row();
    }
    d.close();

    CsvWriter h(ctx.file("capacity_hebbian.csv"), {"ratio", "mean_basin", "std_basin", "n_patterns"});
    for (std::size_t k = 0; k < c.grid.ratios.size(); ++k) {
        const double ratio = c.grid.ratios[k];
        const auto b = experiments::hebbian_basins(static_cast<std::size_t>(n), ratio, c.trials.samples,
                                                   c.trials.per_distance, ctx.seed(1 + k), c.workers, &ctx.log);
        h.field(ratio).field(b.mean).field(b.std).field(static_cast<std::size_t>(
                                                            std::max<long long>(1, std::llround(ratio * n))));
        h.end_row();
    }
    h.close();
}

void run_chaos(Context& ctx)
{
    const auto& c = ctx.cfg;
    CsvWriter w(ctx.file("weight_chaos.csv"), {"n", "width", "mean_overlap", "std_overlap", "mean_weight_change",
                                               "std_weight_change", "samples"});
    std::size_t part = 0;
    for (auto n : c.grid.sizes)
        for (double width : c.grid.widths) {
            const auto noise = c.noise.model(n);
            const auto r = experiments::chaos_point(n, width, c.trials.realizations, c.trials.seeds, noise,
                                                    ctx.seed(part++), c.workers, &ctx.log);
            w.field(r.n).field(r.width).field(r.mean_overlap).field(r.std_overlap);
            w.field(r.mean_weight_change).field(r.std_weight_change).field(r.samples);
            w.end_row();
        }
    w.close();
}

void run_rates(Context& ctx)
{
    const auto& c = ctx.cfg;
    const auto params = c.cavity.params();
    const auto rows = experiments::tabulate_rates(params, c.bath.spec(), c.rates.grid());
    CsvWriter w(ctx.file("rates.csv"), {"delta_e", "K_confocal", "K_glauber", "K_mh"});
    for (const auto& r : rows) {
        w.field(r.delta_e).field(r.confocal).field(r.glauber).field(r.metropolis);
        w.end_row();
    }
    w.close();

    CsvWriter t(ctx.file("thermometry.csv"), {"delta_e", "log_ratio", "expected", "relative_error"});
    for (const auto& p : experiments::thermometry(params, c.rates.thermometry_points)) {
        t.field(p.delta_e).field(p.log_ratio).field(p.expected).field(std::abs(p.log_ratio / p.expected - 1.0));
        t.end_row();
    }
    t.close();
}

json seed_json(const experiments::SeedRecord& r)
{
    std::ostringstream key;
    key << std::hex << std::setfill('0') << std::setw(16) << r.seed.hi << std::setw(16) << r.seed.lo;
    return {{"stream", r.stream}, {"index", r.index}, {"seed", key.str()}};
}

} // namespace

std::string code_version() { return GLASSMEM_VERSION; }

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
    EVP_MD_CTX* md = EVP_MD_CTX_new();
    if (!md) throw IoError("digest context allocation failed");
    bool ok = EVP_DigestInit_ex(md, EVP_sha256(), nullptr) == 1;
    std::vector<char> buf(1 << 16);
    while (ok && in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) ok = EVP_DigestUpdate(md, buf.data(), static_cast<std::size_t>(in.gcount())) == 1;
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    ok = ok && EVP_DigestFinal_ex(md, digest, &len) == 1;
    EVP_MD_CTX_free(md);
    if (!ok) throw IoError("SHA-256 failed for '" + path.string() + "'");
    std::ostringstream hex;
    hex << std::hex << std::setfill('0');
    for (unsigned int k = 0; k < len; ++k) hex << std::setw(2) << static_cast<int>(digest[k]);
    return hex.str();
}

RunManifest run(const ExperimentConfig& cfg)
{
    const auto problems = config::validate(cfg);
    if (!problems.empty()) {
        std::string msg = "invalid config:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }

    const auto t0 = std::chrono::steady_clock::now();
    Context ctx{cfg, fs::path(cfg.output), {}, {}};
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec || !fs::is_directory(ctx.dir)) throw IoError("cannot create output directory '" + cfg.output + "'");

    const auto& e = cfg.experiment;
    if (e == "fig3-couplings") run_couplings(ctx);
    else if (e == "fig4-metastable") run_metastable(ctx);
    else if (e == "fig5-spectra") run_spectra(ctx);
    else if (e == "fig6-dynamics") run_dynamics(ctx);
    else if (e == "fig7-hopfield-basins") run_hopfield(ctx);
    else if (e == "fig8-sk-basins") run_sk(ctx);
    else if (e == "fig9-ccqed-basins") run_ccqed(ctx);
    else if (e == "fig10-capacity") run_capacity(ctx);
    else if (e == "fig11-chaos") run_chaos(ctx);
    else if (e == "rates-table") run_rates(ctx);
    else throw ConfigError("unknown experiment '" + e + "'");

    RunManifest m;
    m.experiment = e;
    m.code_version = code_version();
    m.config = cfg;
    m.seeds = std::move(ctx.log.records);
    for (const auto& name : ctx.files) {
        const auto path = ctx.dir / name;
        m.outputs.push_back({name, static_cast<std::uint64_t>(fs::file_size(path)), sha256_file(path)});
    }
    m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ofstream out(ctx.dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << manifest_json(m) << '\n';
    out.close();
    if (!out) throw IoError("failed writing the manifest in '" + cfg.output + "'");
    return m;
}

std::string manifest_json(const RunManifest& m, int indent)
{
    json seeds = json::array();
    for (const auto& r : m.seeds) seeds.push_back(seed_json(r));
    json outputs = json::array();
    for (const auto& o : m.outputs) outputs.push_back({{"file", o.name}, {"bytes", o.bytes}, {"sha256", o.sha256}});
    json doc = {
        {"experiment", m.experiment},
        {"code_version", m.code_version},
        {"config", json::parse(config::to_json(m.config))},
        {"seeds", seeds},
        {"wall_clock_s", m.wall_clock_s},
        {"outputs", outputs},
    };
    return doc.dump(indent);
}

std::vector<std::string> verify_manifest(const fs::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open '" + manifest_path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }
    std::vector<std::string> bad;
    const auto dir = manifest_path.parent_path();
    for (const auto& o : doc.at("outputs")) {
        const auto name = o.at("file").get<std::string>();
        const auto path = dir / name;
        if (!fs::exists(path) || sha256_file(path) != o.at("sha256").get<std::string>()) bad.push_back(name);
    }
    return bad;
}

} // namespace glassmem::harness
