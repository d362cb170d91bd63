#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "glassmem/connectivity.hpp"
#include "glassmem/errors.hpp"
#include "glassmem/landscape.hpp"
#include "glassmem/parallel.hpp"

using namespace glassmem;
using namespace glassmem::landscape;
using connectivity::CouplingMatrix;

namespace {

CouplingMatrix ferromagnet(Eigen::Index n)
{
    CouplingMatrix c;
    c.values = Eigen::MatrixXd::Ones(n, n);
    c.values.diagonal().setZero();
    return c;
}

SpinState from_bits(std::uint64_t bits, Eigen::Index n)
{
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = (bits >> i) & 1u ? -1.0 : 1.0;
    return SpinState(v);
}

double naive_energy(const SpinState& s, const Eigen::MatrixXd& j, const Eigen::VectorXd& h)
{
    double e = 0;
    for (Eigen::Index a = 0; a < s.size(); ++a) {
        for (Eigen::Index b = 0; b < s.size(); ++b)
            if (a != b) e -= j(a, b) * s[a] * s[b];
        e += h[a] * s[a];
    }
    return e;
}

// Full-recompute steepest descent with lowest-index tie-break.
SpinState naive_sd(SpinState s, const Eigen::MatrixXd& j)
{
    const Eigen::VectorXd h = Eigen::VectorXd::Zero(s.size());
    for (;;) {
        const double e0 = naive_energy(s, j, h);
        double best = 0.0;
        Eigen::Index arg = -1;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const double d = naive_energy(s.flipped(i), j, h) - e0;
            if (d < best - 1e-9) {
                best = d;
                arg = i;
            }
        }
        if (arg < 0) return s;
        s.flip(arg);
    }
}

bool naive_fixed_point(const SpinState& s, const Eigen::MatrixXd& j)
{
    const Eigen::VectorXd h = Eigen::VectorXd::Zero(s.size());
    const double e0 = naive_energy(s, j, h);
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (naive_energy(s.flipped(i), j, h) - e0 <= 0) return false;
    return true;
}

std::string key(const SpinState& s)
{
    std::string k;
    for (Eigen::Index i = 0; i < s.size(); ++i) k += s[i] > 0 ? '+' : '-';
    return k;
}

} // namespace

TEST_CASE("energy under the ordered-pair convention")
{
    const auto f = ferromagnet(3);
    CHECK(energy(SpinState::uniform(3), f) == -6.0);
    CHECK(flip_cost(SpinState::uniform(3), f, ExternalField::zeros(3), 0) == 8.0);

    Rng rng = make_rng(std::uint64_t{2});
    const auto j = connectivity::sk_matrix(8, 1.0, 5);
    ExternalField h{Eigen::VectorXd::Random(8)};
    for (int t = 0; t < 20; ++t) {
        const auto s = SpinState::random(8, rng);
        CHECK(energy(s, j, h) == doctest::Approx(naive_energy(s, j.values, h.h)).epsilon(1e-12));
        CHECK(energy(-s, j) == doctest::Approx(energy(s, j)).epsilon(1e-12));
        for (Eigen::Index i = 0; i < 8; ++i)
            CHECK(flip_cost(s, j, h, i) ==
                  doctest::Approx(naive_energy(s.flipped(i), j.values, h.h) - naive_energy(s, j.values, h.h)));
    }
    CHECK_THROWS_AS(energy(SpinState::uniform(4), j), ShapeError);
    CHECK_THROWS_AS(flip_cost(SpinState::uniform(8), j, ExternalField::zeros(8), 8), IndexError);
    CHECK_THROWS_AS(SpinState(Eigen::VectorXd::Zero(3)), ParameterError);
}

TEST_CASE("steepest descent steps")
{
    const auto f = ferromagnet(3);
    const auto h = ExternalField::zeros(3);
    SpinState s(std::vector<int>{1, -1, 1});
    const auto step = step_sd(s, f, h);
    REQUIRE(step.has_value());
    CHECK(step->index == 1);
    CHECK(step->delta == -8.0);
    CHECK(s == SpinState::uniform(3));
    CHECK_FALSE(step_sd(s, f, h).has_value());

    // spins 2 and 5 down in a ferromagnet: equal minimal costs, lowest index wins
    SpinState t(std::vector<int>{1, 1, -1, 1, 1, -1});
    const auto tie = step_sd(t, ferromagnet(6), ExternalField::zeros(6));
    REQUIRE(tie.has_value());
    CHECK(tie->index == 2);
}

TEST_CASE("zero-temperature Metropolis steps")
{
    const auto f = ferromagnet(3);
    const auto h = ExternalField::zeros(3);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_rng(seed);
        SpinState s(std::vector<int>{1, -1, 1});
        const auto step = step_0tmh(s, f, h, rng);
        REQUIRE(step.has_value());
        CHECK(step->index == 1);
        CHECK_FALSE(step_0tmh(s, f, h, rng).has_value());
    }
}

TEST_CASE("finite-temperature acceptance")
{
    CHECK(acceptance_probability(DynamicsKind::glauber(1.3), 0.0) == doctest::Approx(0.5));
    CHECK(acceptance_probability(DynamicsKind::metropolis(1.3), -2.0) == 1.0);
    CHECK(acceptance_probability(DynamicsKind::metropolis(2.0), 1.0) == doctest::Approx(std::exp(-0.5)));
    CHECK_THROWS_AS(DynamicsKind::glauber(0.0).validate(), ParameterError);

    Rng rng = make_rng(std::uint64_t{8});
    std::normal_distribution<double> g(0.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const double d = g(rng);
        if (d == 0.0) continue;
        const double t = 1e-9 * std::abs(d);
        const double want = d < 0 ? 1.0 : 0.0;
        CHECK(acceptance_probability(DynamicsKind::metropolis(t), d) == want);
        CHECK(acceptance_probability(DynamicsKind::glauber(t), d) == doctest::Approx(want));
    }
}

TEST_CASE("finite-temperature walk keeps the cached fields consistent")
{
    const auto j = connectivity::sk_matrix(30, 1.0 / 30, 6);
    Rng rng = make_rng(std::uint64_t{1});
    Relaxer r(j, SpinState::random(30, rng));
    for (int k = 0; k < 2000; ++k) r.step(DynamicsKind::glauber(0.5), rng);
    const Eigen::VectorXd want = j.off_diagonal() * r.state().values();
    CHECK((r.local_fields() - want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("incremental energy matches the full computation")
{
    const auto j = connectivity::confocal_matrix(connectivity::sample_layout(60, 1.5, 4));
    ExternalField h{Eigen::VectorXd::LinSpaced(60, -0.3, 0.3)};
    Rng rng = make_rng(std::uint64_t{12});
    Relaxer r(j, h, SpinState::random(60, rng));
    double e = r.energy();
    std::uniform_int_distribution<Eigen::Index> pick(0, 59);
    for (int k = 0; k < 500; ++k) {
        const auto i = pick(rng);
        e += r.cost(i);
        r.flip(i);
        CHECK(std::abs(e - energy(r.state(), j, h)) < 1e-10 * std::max(1.0, std::abs(e)));
    }
    Eigen::VectorXd want = j.values * r.state().values() - j.values.diagonal().cwiseProduct(r.state().values());
    CHECK((r.local_fields() - want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("relaxation traces")
{
    const auto f = ferromagnet(10);
    Rng rng = make_rng(std::uint64_t{3});
    for (int t = 0; t < 20; ++t) {
        const auto s = SpinState::random(10, rng);
        const auto tr = relax(s, f, ExternalField::zeros(10), DynamicsKind::sd(), rng);
        CHECK(tr.converged);
        CHECK(tr.steps.size() <= 10);
        const double up = tr.final_state.values().sum();
        CHECK(std::abs(up) == 10.0);
    }

    const auto j = connectivity::sk_matrix(40, 1.0 / 40, 9);
    for (auto kind : {DynamicsKind::sd(), DynamicsKind::zero_tmh()}) {
        const auto tr = relax(SpinState::random(40, rng), j, ExternalField::zeros(40), kind, rng);
        REQUIRE(tr.converged);
        for (std::size_t k = 1; k < tr.steps.size(); ++k) CHECK(tr.steps[k].energy_after < tr.steps[k - 1].energy_after);
        for (const auto& st : tr.steps) CHECK(st.delta_energy < 0);
        CHECK(tr.steps.back().energy_after == doctest::Approx(energy(tr.final_state, j)).epsilon(1e-12));
        Relaxer r(j, tr.final_state);
        CHECK(r.is_fixed_point());
    }
    CHECK(default_max_steps(30) == 100 * 30 * 30);
}

TEST_CASE("stored pseudoinverse pattern does not move")
{
    Rng rng = make_rng(std::uint64_t{5});
    const auto xi = connectivity::PatternSet::random(6, 40, rng);
    const auto j = connectivity::pseudoinverse_matrix(xi);
    for (Eigen::Index mu = 0; mu < 6; ++mu) {
        const auto tr = relax(SpinState(xi.pattern(mu)), j, ExternalField::zeros(40), DynamicsKind::sd(), rng);
        CHECK(tr.converged);
        CHECK(tr.steps.empty());
    }
}

TEST_CASE("global flip commutes with steepest descent")
{
    const auto j = connectivity::confocal_matrix(connectivity::sample_layout(50, 1.0, 21));
    Rng rng = make_rng(std::uint64_t{2});
    for (int t = 0; t < 30; ++t) {
        const auto s = SpinState::random(50, rng);
        const auto a = relax_state(s, j, ExternalField::zeros(50), DynamicsKind::sd(), rng);
        const auto b = relax_state(-s, j, ExternalField::zeros(50), DynamicsKind::sd(), rng);
        CHECK(b == -a);
    }
}

TEST_CASE("steepest descent agrees with a full-recompute oracle")
{
    const auto j = connectivity::sk_matrix(12, 1.0, 31);
    for (std::uint64_t bits = 0; bits < (1u << 12); bits += 37) {
        const auto s = from_bits(bits, 12);
        Rng rng = make_rng(bits);
        CHECK(relax_state(s, j, ExternalField::zeros(12), DynamicsKind::sd(), rng) == naive_sd(s, j.values));
    }
}

TEST_CASE("fixed points of SD and 0TMH are exactly the brute-force local minima")
{
    for (auto seed : {1u, 2u, 3u}) {
        const auto j = seed == 1 ? connectivity::sk_matrix(12, 1.0, 17)
                                 : connectivity::confocal_matrix(connectivity::sample_layout(12, 1.0 + seed, seed));
        const auto h = ExternalField::zeros(12);
        int minima = 0;
        for (std::uint64_t bits = 0; bits < (1u << 12); ++bits) {
            const auto s = from_bits(bits, 12);
            const bool brute = naive_fixed_point(s, j.values);
            SpinState a = s, b = s;
            Rng rng = make_rng(bits);
            const bool sd_fixed = !step_sd(a, j, h).has_value();
            const bool tmh_fixed = !step_0tmh(b, j, h, rng).has_value();
            CHECK(sd_fixed == brute);
            CHECK(tmh_fixed == brute);
            minima += brute;
        }
        CHECK(minima >= 2);
    }
}

TEST_CASE("metastable counting")
{
    Rng rng = make_rng(std::uint64_t{4});
    const auto narrow = connectivity::confocal_matrix(connectivity::sample_layout(50, 0.1, 3));
    CHECK(count_metastable(narrow, ExternalField::zeros(50), 50, rng).count == 1);

    // exhaustive enumeration over canonical states
    const Eigen::Index n = 12;
    for (std::uint64_t seed : {5u, 6u}) {
        const auto j = connectivity::confocal_matrix(connectivity::sample_layout(n, 1.5, seed));
        std::set<std::string> brute;
        for (std::uint64_t bits = 0; bits < (1u << (n - 1)); ++bits) {
            const auto s = from_bits(bits << 1, n); // first spin +1
            if (naive_fixed_point(s, j.values)) brute.insert(key(s));
        }
        const auto cat = count_metastable(j, ExternalField::zeros(n), 20000, rng);
        std::set<std::string> found;
        for (const auto& s : cat.states) {
            CHECK(s[0] == 1.0);
            found.insert(key(s));
        }
        CHECK(cat.count == cat.states.size());
        CHECK(found == brute);
    }

    Eigen::MatrixXd two(2, 8);
    two << 1, 1, 1, 1, 1, 1, 1, 1, 1, -1, 1, -1, 1, -1, 1, -1;
    const auto heb = connectivity::hebbian_matrix(connectivity::PatternSet(two));
    const auto cat = count_metastable(heb, ExternalField::zeros(8), 500, rng);
    std::set<std::string> keys;
    for (const auto& s : cat.states) keys.insert(key(s));
    CHECK(keys.count(key(SpinState(Eigen::VectorXd(two.row(0).transpose())))) == 1);
    CHECK(keys.count(key(SpinState(Eigen::VectorXd(two.row(1).transpose())))) == 1);
}

TEST_CASE("steepest descent is deterministic across worker counts")
{
    const auto j = connectivity::confocal_matrix(connectivity::sample_layout(80, 1.5, 8));
    auto job = [&](std::size_t k) {
        Rng rng = trial_rng(99, "sd", k);
        const auto tr = relax(SpinState::random(80, rng), j, ExternalField::zeros(80), DynamicsKind::sd(), rng);
        std::vector<double> flat;
        for (const auto& s : tr.steps) {
            flat.push_back(static_cast<double>(s.index));
            flat.push_back(s.energy_after);
        }
        return flat;
    };
    const auto one = parallel_map(64, 1, job);
    const auto many = parallel_map(64, 4, job);
    CHECK(one == many);
    CHECK(job(3) == one[3]);
}

TEST_CASE("scaling fit")
{
    const ScalingFit truth{};
    std::vector<ScalingSample> data;
    for (double n : {100.0, 200.0, 400.0})
        for (int k = 0; k < 12; ++k) {
            const double w = 0.5 + 0.3 * k / 11.0;
            data.push_back({n, w, scaling_model(truth, n, w)});
        }
    ScalingFit init;
    init.a = 0.6;
    init.b = 2.5;
    init.nu = 2.0;
    init.w_am = 0.6;
    const auto fit = fit_metastable_scaling(data, init);
    CHECK(fit.a == doctest::Approx(0.33).epsilon(1e-6));
    CHECK(fit.b == doctest::Approx(3.4).epsilon(1e-6));
    CHECK(fit.nu == doctest::Approx(2.4).epsilon(1e-6));
    CHECK(fit.w_am == doctest::Approx(0.67).epsilon(1e-6));

    for (auto& d : data) d.count = 1.0;
    CHECK_THROWS_AS(fit_metastable_scaling(data), FitError);
}
