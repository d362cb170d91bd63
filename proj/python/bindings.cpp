#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "glassmem/cavity.hpp"
#include "glassmem/config.hpp"
#include "glassmem/connectivity.hpp"
#include "glassmem/errors.hpp"
#include "glassmem/harness.hpp"
#include "glassmem/landscape.hpp"
#include "glassmem/memory.hpp"
#include "glassmem/stats.hpp"

namespace py = pybind11;
using namespace glassmem;

namespace {

connectivity::CouplingMatrix as_coupling(const Eigen::MatrixXd& values, bool normalized = false)
{
    connectivity::CouplingMatrix c;
    c.values = values;
    c.kind = connectivity::CouplingKind::SK;
    c.normalized = normalized;
    c.validate();
    return c;
}

landscape::DynamicsKind dynamics(const std::string& kind, double temperature)
{
    return config::dynamics_kind({kind, temperature});
}

cavity::CavityParams cavity_params(py::object params)
{
    if (params.is_none()) return {};
    return params.cast<cavity::CavityParams>();
}

py::dict trace_dict(const landscape::RelaxationTrace& t)
{
    std::vector<Eigen::Index> index;
    std::vector<double> delta, energy;
    for (const auto& s : t.steps) {
        index.push_back(s.index);
        delta.push_back(s.delta_energy);
        energy.push_back(s.energy_after);
    }
    py::dict d;
    d["final"] = t.final_state.values();
    d["converged"] = t.converged;
    d["index"] = index;
    d["delta_energy"] = delta;
    d["energy"] = energy;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Confocal-cavity spin networks: couplings, relaxation, ensemble dynamics, memory codec";

    static py::exception<Error> base(m, "GlassmemError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
    py::register_exception<CodecError>(m, "CodecError", base.ptr());

    m.attr("__version__") = harness::code_version();

    py::class_<cavity::CavityParams>(m, "CavityParams")
        .def(py::init<>())
        .def_readwrite("omega_z", &cavity::CavityParams::omega_z)
        .def_readwrite("delta_c", &cavity::CavityParams::delta_c)
        .def_readwrite("kappa", &cavity::CavityParams::kappa)
        .def_readwrite("j_ii", &cavity::CavityParams::j_ii);

    // couplings
    m.def(
        "sample_positions",
        [](Eigen::Index n, double width, std::uint64_t seed) {
            return Eigen::MatrixXd(connectivity::sample_layout(n, width, seed).positions);
        },
        py::arg("n"), py::arg("width"), py::arg("seed"));
    m.def(
        "confocal_matrix",
        [](Eigen::Index n, double width, std::uint64_t seed, bool normalized, double beta) {
            connectivity::ConfocalParams p;
            p.beta = beta;
            return connectivity::confocal_matrix(connectivity::sample_layout(n, width, seed), p, normalized).values;
        },
        py::arg("n"), py::arg("width"), py::arg("seed"), py::arg("normalized") = true, py::arg("beta") = 10.0);
    m.def(
        "sk_matrix",
        [](Eigen::Index n, double variance, std::uint64_t seed) {
            return connectivity::sk_matrix(n, variance, seed).values;
        },
        py::arg("n"), py::arg("variance"), py::arg("seed"));
    m.def(
        "hebbian_matrix",
        [](const Eigen::MatrixXd& patterns) {
            return connectivity::hebbian_matrix(connectivity::PatternSet(patterns)).values;
        },
        py::arg("patterns"));
    m.def(
        "pseudoinverse_matrix",
        [](const Eigen::MatrixXd& patterns) {
            return connectivity::pseudoinverse_matrix(connectivity::PatternSet(patterns)).values;
        },
        py::arg("patterns"));

    // landscape
    m.def(
        "energy",
        [](const Eigen::VectorXd& s, const Eigen::MatrixXd& j) {
            return landscape::energy(landscape::SpinState(s), as_coupling(j));
        },
        py::arg("state"), py::arg("coupling"));
    m.def(
        "flip_cost",
        [](const Eigen::VectorXd& s, const Eigen::MatrixXd& j, Eigen::Index i) {
            return landscape::flip_cost(landscape::SpinState(s), as_coupling(j), landscape::ExternalField::zeros(s.size()),
                                        i);
        },
        py::arg("state"), py::arg("coupling"), py::arg("index"));
    m.def(
        "relax",
        [](const Eigen::VectorXd& s, const Eigen::MatrixXd& j, const std::string& kind, double temperature,
           std::uint64_t seed, std::int64_t max_steps) {
            Rng rng = make_rng(seed);
            const auto c = as_coupling(j);
            const auto n = static_cast<Eigen::Index>(s.size());
            const auto steps = max_steps > 0 ? max_steps : landscape::default_max_steps(n);
            return trace_dict(landscape::relax(landscape::SpinState(s), c, landscape::ExternalField::zeros(n),
                                               dynamics(kind, temperature), steps, rng));
        },
        py::arg("state"), py::arg("coupling"), py::arg("dynamics") = "sd", py::arg("temperature") = 1.0,
        py::arg("seed") = 0, py::arg("max_steps") = 0);
    m.def(
        "count_metastable",
        [](const Eigen::MatrixXd& j, std::size_t n_seeds, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            const auto c = as_coupling(j);
            return landscape::count_metastable(c, landscape::ExternalField::zeros(c.size()), n_seeds, rng).count;
        },
        py::arg("coupling"), py::arg("n_seeds"), py::arg("seed") = 0);

    // coupling statistics
    m.def("coupling_pdf", &stats::coupling_pdf, py::arg("j"), py::arg("width"));
    m.def("coupling_cdf", &stats::coupling_cdf, py::arg("j"), py::arg("width"));
    m.def(
        "coupling_moments",
        [](double w) {
            const auto mo = stats::coupling_moments(w);
            return py::make_tuple(mo.mean, mo.std);
        },
        py::arg("width"));
    m.def("coupling_correlation", &stats::coupling_correlation, py::arg("width"));
    m.def("negative_fraction", &stats::negative_fraction, py::arg("width"));
    m.def("semicircle_hellinger", &stats::semicircle_hellinger, py::arg("eigenvalues"));

    // rates and dynamics
    m.def("effective_temperature", &cavity::effective_temperature, py::arg("params"));
    m.def(
        "rate_confocal", [](double de, py::object p) { return cavity::rate_confocal(de, cavity_params(p)); },
        py::arg("delta_e"), py::arg("params") = py::none());
    m.def(
        "rate_classical_ohmic",
        [](double de, double alpha, double omega_c, py::object p) {
            return cavity::rate_classical_ohmic(de, cavity_params(p), {alpha, omega_c});
        },
        py::arg("delta_e"), py::arg("alpha"), py::arg("omega_c"), py::arg("params") = py::none());
    m.def(
        "rate_quantum_ohmic",
        [](double de, double alpha_q, double omega_c, py::object p) {
            return cavity::rate_quantum_ohmic(de, cavity_params(p), {alpha_q, omega_c});
        },
        py::arg("delta_e"), py::arg("alpha_q"), py::arg("omega_c"), py::arg("params") = py::none());
    m.def("glauber_rate", &cavity::glauber_rate, py::arg("delta_e"), py::arg("temperature"));
    m.def("metropolis_rate", &cavity::metropolis_rate, py::arg("delta_e"), py::arg("temperature"));
    m.def("decoherence_half_time", &cavity::decoherence_half_time, py::arg("alpha"), py::arg("omega_c"),
          py::arg("delta_s"));
    m.def(
        "meanfield",
        [](const Eigen::VectorXd& m0, double spin, const Eigen::MatrixXd& j, double t_max, py::object p) {
            cavity::EnsembleState st{m0, Eigen::VectorXd::Constant(m0.size(), spin), 0.0};
            const auto tr = cavity::meanfield_integrate(st, as_coupling(j), cavity::RateKernel::cavity(cavity_params(p)),
                                                        t_max);
            Eigen::MatrixXd out(static_cast<Eigen::Index>(tr.size()), m0.size());
            for (std::size_t k = 0; k < tr.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = tr.m[k].transpose();
            return py::make_tuple(tr.times, out);
        },
        py::arg("m0"), py::arg("spin"), py::arg("coupling"), py::arg("t_max"), py::arg("params") = py::none());
    m.def(
        "unravel",
        [](const Eigen::VectorXd& m0, double spin, const Eigen::MatrixXd& j, double t_max, std::uint64_t seed,
           py::object p) {
            cavity::EnsembleState st{m0, Eigen::VectorXd::Constant(m0.size(), spin), 0.0};
            Rng rng = make_rng(seed);
            const auto tr =
                cavity::unravel(st, as_coupling(j), cavity::RateKernel::cavity(cavity_params(p)), t_max, rng);
            std::vector<double> times;
            std::vector<Eigen::Index> index;
            std::vector<int> direction;
            for (const auto& e : tr.events) {
                times.push_back(e.time);
                index.push_back(e.index);
                direction.push_back(e.direction);
            }
            return py::make_tuple(times, index, direction, tr.final.m);
        },
        py::arg("m0"), py::arg("spin"), py::arg("coupling"), py::arg("t_max"), py::arg("seed") = 0,
        py::arg("params") = py::none());

    // memory
    m.def(
        "recall_curve",
        [](const Eigen::VectorXd& attractor, const Eigen::MatrixXd& j, const std::string& kind, std::size_t max_d,
           std::size_t trials, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            const auto c = as_coupling(j);
            const auto r = memory::recall_curve(landscape::SpinState(attractor), c,
                                                landscape::ExternalField::zeros(c.size()), dynamics(kind, 1.0), max_d,
                                                rng, {trials, false});
            return py::make_tuple(r.probabilities, r.basin_size);
        },
        py::arg("attractor"), py::arg("coupling"), py::arg("dynamics") = "sd", py::arg("max_d") = 10,
        py::arg("trials") = 100, py::arg("seed") = 0);
    m.def(
        "capacity_sweep",
        [](Eigen::Index n, const std::vector<double>& ratios, std::uint64_t seed, double width, std::size_t trials) {
            Rng rng = make_rng(seed);
            memory::CapacityOptions opt;
            opt.width = width;
            opt.recall = {trials, true};
            py::list rows;
            for (const auto& r : memory::capacity_sweep(n, ratios, rng, opt)) {
                py::dict d;
                d["ratio"] = r.ratio;
                d["n_patterns"] = r.n_patterns;
                d["mean_basin"] = r.mean_basin;
                d["std_basin"] = r.std_basin;
                d["exact"] = r.exact;
                d["decode_failures"] = r.decode_failures;
                rows.append(d);
            }
            return rows;
        },
        py::arg("n"), py::arg("ratios"), py::arg("seed") = 0, py::arg("width") = 1.5, py::arg("trials") = 100);

    // harness
    m.def("experiments", &config::experiment_names);
    m.def(
        "default_config", [](const std::string& e) { return config::to_json(config::default_config(e)); },
        py::arg("experiment"));
    m.def(
        "validate_config",
        [](const std::string& text, const std::string& e) { return config::validate(config::parse_config(text, e)); },
        py::arg("text"), py::arg("experiment") = "");
    m.def(
        "run",
        [](const std::string& text, const std::string& e) {
            const auto manifest = harness::run(config::parse_config(text, e));
            return harness::manifest_json(manifest);
        },
        py::arg("config"), py::arg("experiment") = "");
}
