#include "glassmem/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "glassmem/errors.hpp"

namespace glassmem::config {

using nlohmann::json;

static_assert(std::is_same_v<std::size_t, std::uint64_t>);

namespace {

const std::vector<std::string> kExperiments{
    "fig3-couplings",      "fig4-metastable", "fig5-spectra",     "fig6-dynamics", "fig7-hopfield-basins",
    "fig8-sk-basins",      "fig9-ccqed-basins", "fig10-capacity", "fig11-chaos",   "rates-table",
};

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (n - 1.0);
    return v;
}

std::vector<double> geomspace(double lo, double hi, std::size_t n)
{
    auto v = linspace(std::log(lo), std::log(hi), n);
    for (auto& x : v) x = std::exp(x);
    v.front() = lo;
    v.back() = hi;
    return v;
}

// Reads keys out of one JSON object and complains about the rest.
class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where))
    {
        if (!obj_.is_object()) throw ConfigError(label() + " must be an object");
    }

    void get(const char* key, double& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(key, "a number");
            out = v->get<double>();
        }
    }

    // std::size_t and std::uint64_t coincide on the supported targets.
    void get(const char* key, std::size_t& out)
    {
        if (const json* v = find(key)) out = unsigned_value(*v, key);
    }

    void get(const char* key, unsigned& out)
    {
        if (const json* v = find(key)) {
            const auto u = unsigned_value(*v, key);
            if (u > 4096) fail(key, "a worker count up to 4096");
            out = static_cast<unsigned>(u);
        }
    }

    void get(const char* key, std::string& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(key, "a string");
            out = v->get<std::string>();
        }
    }

    void get(const char* key, std::vector<double>& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_array()) fail(key, "an array of numbers");
            out.clear();
            for (const auto& x : *v) {
                if (!x.is_number()) fail(key, "an array of numbers");
                out.push_back(x.get<double>());
            }
        }
    }

    void get(const char* key, std::vector<std::size_t>& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_array()) fail(key, "an array of nonnegative integers");
            out.clear();
            for (const auto& x : *v) out.push_back(unsigned_value(x, key));
        }
    }

    template <class F>
    void section(const char* key, F&& body)
    {
        if (const json* v = find(key)) {
            Reader sub(*v, where_.empty() ? key : where_ + "." + key);
            body(sub);
            sub.finish();
        }
    }

    void skip(const char* key) { seen_.insert(key); }

    void finish() const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("unknown key '" + (where_.empty() ? it.key() : where_ + "." + it.key()) + "'");
    }

private:
    const json* find(const char* key)
    {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::uint64_t unsigned_value(const json& v, const char* key) const
    {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        if (v.is_number_float()) {
            // Accept 1e6-style integers.
            const double d = v.get<double>();
            if (d >= 0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
        }
        fail(key, "a nonnegative integer");
    }

    [[noreturn]] void fail(const char* key, const char* what) const
    {
        throw ConfigError("'" + (where_.empty() ? std::string(key) : where_ + "." + key) + "' must be " + what);
    }

    std::string label() const { return where_.empty() ? "config" : "'" + where_ + "'"; }

    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

void read_into(const json& doc, ExperimentConfig& c)
{
    Reader r(doc, "");
    r.skip("experiment");
    r.get("seed", c.seed);
    r.get("workers", c.workers);
    r.get("output", c.output);
    r.section("grid", [&](Reader& s) {
        s.get("sizes", c.grid.sizes);
        s.get("widths", c.grid.widths);
        s.get("ratios", c.grid.ratios);
    });
    r.section("trials", [&](Reader& s) {
        s.get("realizations", c.trials.realizations);
        s.get("seeds", c.trials.seeds);
        s.get("per_distance", c.trials.per_distance);
        s.get("samples", c.trials.samples);
        s.get("bins", c.trials.bins);
    });
    r.section("dynamics", [&](Reader& s) {
        s.get("kind", c.dynamics.kind);
        s.get("temperature", c.dynamics.temperature);
    });
    r.section("cavity", [&](Reader& s) {
        s.get("omega_z_mhz", c.cavity.omega_z_mhz);
        s.get("delta_c_mhz", c.cavity.delta_c_mhz);
        s.get("kappa_mhz", c.cavity.kappa_mhz);
        s.get("j_ii_mhz", c.cavity.j_ii_mhz);
    });
    r.section("bath", [&](Reader& s) {
        s.get("kind", c.bath.kind);
        s.get("alpha", c.bath.alpha);
        s.get("alpha_q", c.bath.alpha_q);
        s.get("omega_c_mhz", c.bath.omega_c_mhz);
    });
    r.section("noise", [&](Reader& s) {
        s.get("position_sigma_um", c.noise.position_sigma_um);
        s.get("w0_um", c.noise.w0_um);
        s.get("total_atoms", c.noise.total_atoms);
    });
    r.section("memory", [&](Reader& s) {
        s.get("width", c.memory.width);
        s.get("lambda_per_n", c.memory.lambda_per_n);
        s.get("seed_factor", c.memory.seed_factor);
    });
    r.section("scenario", [&](Reader& s) {
        s.get("n", c.scenario.n);
        s.get("spin", c.scenario.spin);
        s.get("width", c.scenario.width);
        s.get("misaligned", c.scenario.misaligned);
        s.get("diagonal", c.scenario.diagonal);
        s.get("t_max_us", c.scenario.t_max_us);
        s.get("rise_tolerance", c.scenario.rise_tolerance);
    });
    r.section("spectrum", [&](Reader& s) {
        s.get("n", c.spectrum.n);
        s.get("width", c.spectrum.width);
        s.get("collapse_trials", c.spectrum.collapse_trials);
        s.get("nus", c.spectrum.nus);
    });
    r.section("rates", [&](Reader& s) {
        s.get("min_mhz", c.rates.min_mhz);
        s.get("max_mhz", c.rates.max_mhz);
        s.get("points", c.rates.points);
        s.get("thermometry_points", c.rates.thermometry_points);
    });
    r.finish();
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace

const std::vector<std::string>& experiment_names() { return kExperiments; }

bool is_experiment(const std::string& name)
{
    return std::find(kExperiments.begin(), kExperiments.end(), name) != kExperiments.end();
}

cavity::CavityParams Cavity::params() const
{
    cavity::CavityParams p;
    p.omega_z = cavity::angular_from_mhz(omega_z_mhz);
    p.delta_c = cavity::angular_from_mhz(delta_c_mhz);
    p.kappa = cavity::angular_from_mhz(kappa_mhz);
    p.j_ii = cavity::angular_from_mhz(j_ii_mhz);
    return p;
}

cavity::BathSpec Bath::spec() const
{
    const double wc = cavity::angular_from_mhz(omega_c_mhz);
    if (kind == "none") return cavity::NoBath{};
    if (kind == "classical") return cavity::ClassicalOhmic{alpha, wc};
    if (kind == "quantum") return cavity::QuantumOhmic{alpha_q, wc};
    throw ConfigError("unknown bath kind '" + kind + "'");
}

memory::NoiseModel Noise::model(std::size_t n) const
{
    auto m = memory::NoiseModel::standard(static_cast<Eigen::Index>(n), total_atoms);
    m.position_sigma = position_sigma_um;
    m.w0_um = w0_um;
    return m;
}

std::vector<double> Rates::grid() const
{
    auto g = linspace(min_mhz, max_mhz, points);
    for (auto& x : g) x = cavity::angular_from_mhz(x);
    return g;
}

landscape::DynamicsKind dynamics_kind(const Dynamics& d)
{
    if (d.kind == "sd") return landscape::DynamicsKind::sd();
    if (d.kind == "0tmh") return landscape::DynamicsKind::zero_tmh();
    if (d.kind == "metropolis") return landscape::DynamicsKind::metropolis(d.temperature);
    if (d.kind == "glauber") return landscape::DynamicsKind::glauber(d.temperature);
    throw ConfigError("unknown dynamics kind '" + d.kind + "'");
}

ExperimentConfig default_config(const std::string& experiment)
{
    if (!is_experiment(experiment)) throw ConfigError("unknown experiment '" + experiment + "'");
    ExperimentConfig c;
    c.experiment = experiment;
    c.grid.sizes = {100};
    c.grid.widths = {1.0};
    c.grid.ratios = {0.1};

    if (experiment == "fig3-couplings") {
        c.grid.widths = {0.5, 1.0, 2.0, 4.0};
        c.trials.samples = 1000000;
        c.trials.bins = 100;
    } else if (experiment == "fig4-metastable") {
        c.grid.sizes = {100, 200, 400};
        c.grid.widths = linspace(0.5, 0.8, 12);
        c.trials.realizations = 10;
        c.trials.seeds = 500;
    } else if (experiment == "fig5-spectra") {
        c.grid.sizes = {100, 300, 1000};
        c.grid.widths = geomspace(0.5, 12.0, 12);
        c.trials.realizations = 10;
    } else if (experiment == "fig6-dynamics") {
        c.grid.sizes = {c.scenario.n};
        c.grid.widths = {c.scenario.width};
        c.trials.realizations = 20;
    } else if (experiment == "fig7-hopfield-basins") {
        c.grid.sizes = {100};
        c.grid.ratios = {0.05, 0.1, 0.138, 0.2, 0.3, 0.4, 0.5, 0.6};
        c.trials.samples = 20;
        c.trials.realizations = 10;
    } else if (experiment == "fig8-sk-basins") {
        c.grid.sizes = {100, 200, 400};
        c.trials.realizations = 10;
        c.trials.seeds = 100;
    } else if (experiment == "fig9-ccqed-basins") {
        c.grid.sizes = {100};
        c.grid.widths = {0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
        c.trials.realizations = 5;
        c.trials.seeds = 20;
    } else if (experiment == "fig10-capacity") {
        c.grid.sizes = {200};
        c.grid.ratios = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    } else if (experiment == "fig11-chaos") {
        c.grid.sizes = {50, 100};
        c.grid.widths = {0.25, 0.5, 1.0, 2.0, 4.0};
        c.trials.realizations = 10;
        c.trials.seeds = 10;
    }
    return c;
}

ExperimentConfig parse_config(const std::string& text, const std::string& experiment)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be an object");

    std::string name = experiment;
    if (auto it = doc.find("experiment"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("'experiment' must be a string");
        const auto declared = it->get<std::string>();
        if (!name.empty() && declared != name)
            throw ConfigError("config is for '" + declared + "', not '" + name + "'");
        name = declared;
    }
    if (name.empty()) throw ConfigError("no experiment named");

    auto c = default_config(name);
    read_into(doc, c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& experiment)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), experiment);
}

std::string to_json(const ExperimentConfig& c, int indent)
{
    json doc = {
        {"experiment", c.experiment},
        {"seed", c.seed},
        {"workers", c.workers},
        {"output", c.output},
        {"grid", {{"sizes", c.grid.sizes}, {"widths", c.grid.widths}, {"ratios", c.grid.ratios}}},
        {"trials",
         {{"realizations", c.trials.realizations},
          {"seeds", c.trials.seeds},
          {"per_distance", c.trials.per_distance},
          {"samples", c.trials.samples},
          {"bins", c.trials.bins}}},
        {"dynamics", {{"kind", c.dynamics.kind}, {"temperature", c.dynamics.temperature}}},
        {"cavity",
         {{"omega_z_mhz", c.cavity.omega_z_mhz},
          {"delta_c_mhz", c.cavity.delta_c_mhz},
          {"kappa_mhz", c.cavity.kappa_mhz},
          {"j_ii_mhz", c.cavity.j_ii_mhz}}},
        {"bath",
         {{"kind", c.bath.kind},
          {"alpha", c.bath.alpha},
          {"alpha_q", c.bath.alpha_q},
          {"omega_c_mhz", c.bath.omega_c_mhz}}},
        {"noise",
         {{"position_sigma_um", c.noise.position_sigma_um},
          {"w0_um", c.noise.w0_um},
          {"total_atoms", c.noise.total_atoms}}},
        {"memory",
         {{"width", c.memory.width}, {"lambda_per_n", c.memory.lambda_per_n}, {"seed_factor", c.memory.seed_factor}}},
        {"scenario",
         {{"n", c.scenario.n},
          {"spin", c.scenario.spin},
          {"width", c.scenario.width},
          {"misaligned", c.scenario.misaligned},
          {"diagonal", c.scenario.diagonal},
          {"t_max_us", c.scenario.t_max_us},
          {"rise_tolerance", c.scenario.rise_tolerance}}},
        {"spectrum",
         {{"n", c.spectrum.n},
          {"width", c.spectrum.width},
          {"collapse_trials", c.spectrum.collapse_trials},
          {"nus", c.spectrum.nus}}},
        {"rates",
         {{"min_mhz", c.rates.min_mhz},
          {"max_mhz", c.rates.max_mhz},
          {"points", c.rates.points},
          {"thermometry_points", c.rates.thermometry_points}}},
    };
    return doc.dump(indent);
}

std::vector<std::string> validate(const ExperimentConfig& c)
{
    std::vector<std::string> bad;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) bad.push_back(msg);
    };

    check(is_experiment(c.experiment), "unknown experiment '" + c.experiment + "'");
    check(c.workers >= 1, "workers must be at least 1");
    check(!c.output.empty(), "output path is empty");

    check(!c.grid.sizes.empty(), "empty size grid");
    check(std::all_of(c.grid.sizes.begin(), c.grid.sizes.end(), [](auto n) { return n >= 2 && n <= 20000; }),
          "grid sizes must be in [2, 20000]");
    check(!c.grid.widths.empty(), "empty width grid");
    check(std::all_of(c.grid.widths.begin(), c.grid.widths.end(), positive), "grid widths must be positive");
    check(std::adjacent_find(c.grid.widths.begin(), c.grid.widths.end(), std::greater_equal<>()) ==
              c.grid.widths.end(),
          "grid widths must be strictly increasing");
    check(!c.grid.ratios.empty(), "empty ratio grid");
    check(std::all_of(c.grid.ratios.begin(), c.grid.ratios.end(), [](double r) { return r > 0.0 && r <= 1.0; }),
          "pattern ratios must be in (0, 1]");

    check(c.trials.realizations >= 1, "trials.realizations must be at least 1");
    check(c.trials.seeds >= 1, "trials.seeds must be at least 1");
    check(c.trials.per_distance >= 1, "trials.per_distance must be at least 1");
    check(c.trials.samples >= 1, "trials.samples must be at least 1");
    check(c.trials.bins >= 1, "trials.bins must be at least 1");

    const auto& d = c.dynamics.kind;
    check(d == "sd" || d == "0tmh" || d == "metropolis" || d == "glauber", "unknown dynamics kind '" + d + "'");
    if (d == "metropolis" || d == "glauber") check(positive(c.dynamics.temperature), "temperature must be positive");

    check(!(c.cavity.delta_c_mhz > 0.0), "blue detuning unsupported");
    check(c.cavity.delta_c_mhz != 0.0, "cavity detuning must be nonzero");
    check(std::isfinite(c.cavity.delta_c_mhz), "cavity detuning must be finite");
    check(positive(c.cavity.kappa_mhz), "kappa must be positive");
    check(positive(c.cavity.omega_z_mhz), "omega_z must be positive");
    check(std::isfinite(c.cavity.j_ii_mhz) && c.cavity.j_ii_mhz >= 0.0, "j_ii must be nonnegative");

    const auto& b = c.bath.kind;
    check(b == "none" || b == "classical" || b == "quantum", "unknown bath kind '" + b + "'");
    check(positive(c.bath.alpha), "bath alpha must be positive");
    check(positive(c.bath.alpha_q), "bath alpha_q must be positive");
    check(positive(c.bath.omega_c_mhz), "bath omega_c must be positive");

    check(std::isfinite(c.noise.position_sigma_um) && c.noise.position_sigma_um >= 0.0,
          "position jitter must be nonnegative");
    check(positive(c.noise.w0_um), "w0 must be positive");
    const double largest = c.grid.sizes.empty() ? 0.0 : static_cast<double>(*std::max_element(
                                                             c.grid.sizes.begin(), c.grid.sizes.end()));
    check(std::isfinite(c.noise.total_atoms) && c.noise.total_atoms >= std::max(largest, 1.0),
          "total_atoms must be at least one per ensemble");

    check(positive(c.memory.width), "memory width must be positive");
    check(positive(c.memory.lambda_per_n), "lambda_per_n must be positive");
    check(c.memory.seed_factor >= 1, "seed_factor must be at least 1");

    check(c.scenario.n >= 2, "scenario needs at least two ensembles");
    check(std::isfinite(c.scenario.spin) && c.scenario.spin >= 0.5, "spin magnitude must be at least 1/2");
    check(positive(c.scenario.width), "scenario width must be positive");
    check(c.scenario.misaligned <= c.scenario.n, "cannot misalign more ensembles than exist");
    check(std::isfinite(c.scenario.diagonal) && c.scenario.diagonal >= 0.0, "scenario diagonal must be nonnegative");
    check(positive(c.scenario.t_max_us), "t_max must be positive");
    check(std::isfinite(c.scenario.rise_tolerance) && c.scenario.rise_tolerance >= 0.0,
          "rise tolerance must be nonnegative");

    check(c.spectrum.n >= 32, "spectrum size must be at least 32");
    check(positive(c.spectrum.width), "spectrum width must be positive");
    check(c.spectrum.collapse_trials >= 1, "collapse_trials must be at least 1");
    check(!c.spectrum.nus.empty(), "empty exponent list");
    check(std::all_of(c.spectrum.nus.begin(), c.spectrum.nus.end(),
                      [](double nu) { return std::isfinite(nu) && nu != 0.0; }),
          "collapse exponents must be finite and nonzero");
    if (c.experiment == "fig5-spectra")
        check(std::all_of(c.grid.sizes.begin(), c.grid.sizes.end(), [](auto n) { return n >= 32; }),
              "spectrum sizes must be at least 32");

    check(std::isfinite(c.rates.min_mhz) && std::isfinite(c.rates.max_mhz) && c.rates.min_mhz < c.rates.max_mhz,
          "rate grid needs min < max");
    check(c.rates.points >= 2, "rate grid needs at least two points");
    check(c.rates.thermometry_points >= 1, "thermometry needs at least one point");
    return bad;
}

} // namespace glassmem::config
