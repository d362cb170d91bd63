#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "glassmem/config.hpp"
#include "glassmem/errors.hpp"
#include "glassmem/harness.hpp"
#include "glassmem/io.hpp"
#include "glassmem/random.hpp"

using namespace glassmem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("glassmem_harness_" + name);
    fs::remove_all(p);
    return p;
}

config::ExperimentConfig small_chaos(const fs::path& out, unsigned workers)
{
    auto c = config::default_config("fig11-chaos");
    c.grid.sizes = {30};
    c.grid.widths = {0.5, 2.0};
    c.trials.realizations = 2;
    c.trials.seeds = 3;
    c.workers = workers;
    c.seed = 99;
    c.output = out.string();
    return c;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("every experiment has a runnable default config that survives a round trip")
{
    CHECK(config::experiment_names().size() == 10);
    for (const auto& name : config::experiment_names()) {
        const auto c = config::default_config(name);
        CHECK(c.experiment == name);
        CHECK(config::validate(c).empty());
        CHECK(config::parse_config(config::to_json(c)) == c);
    }
    CHECK_THROWS_AS(config::default_config("fig99"), ConfigError);
}

TEST_CASE("config overlays and errors")
{
    const auto c = config::parse_config(R"({"seed": 7, "trials": {"seeds": 4}})", "fig8-sk-basins");
    CHECK(c.seed == 7);
    CHECK(c.trials.seeds == 4);
    CHECK(c.grid == config::default_config("fig8-sk-basins").grid);

    CHECK_THROWS_AS(config::parse_config(R"({"sede": 7})", "fig8-sk-basins"), ConfigError);
    CHECK_THROWS_AS(config::parse_config(R"({"trials": {"seeds": "many"}})", "fig8-sk-basins"), ConfigError);
    CHECK_THROWS_AS(config::parse_config("{not json", "fig8-sk-basins"), ConfigError);
    CHECK_THROWS_AS(config::parse_config(R"({"experiment": "fig3-couplings"})", "fig8-sk-basins"), ConfigError);
    CHECK_THROWS_AS(config::parse_config("{}"), ConfigError);

    auto blue = config::default_config("rates-table");
    blue.cavity.delta_c_mhz = 0.5;
    CHECK_FALSE(config::validate(blue).empty());
    auto empty = config::default_config("fig3-couplings");
    empty.grid.widths.clear();
    CHECK_FALSE(config::validate(empty).empty());
}

TEST_CASE("dynamics names")
{
    config::Dynamics d;
    d.kind = "metropolis";
    d.temperature = 0.5;
    CHECK(config::dynamics_kind(d).type == landscape::DynamicsType::MetropolisT);
    d.kind = "0tmh";
    CHECK(config::dynamics_kind(d).type == landscape::DynamicsType::ZeroTMH);
    d.kind = "annealing";
    CHECK_THROWS_AS(config::dynamics_kind(d), ConfigError);
}

TEST_CASE("runs are reproducible and independent of the worker count")
{
    const auto a = harness::run(small_chaos(scratch("a"), 1));
    const auto b = harness::run(small_chaos(scratch("b"), 1));
    const auto c = harness::run(small_chaos(scratch("c"), 4));
    REQUIRE(!a.outputs.empty());
    REQUIRE(a.outputs.size() == b.outputs.size());
    REQUIRE(a.outputs.size() == c.outputs.size());
    for (std::size_t k = 0; k < a.outputs.size(); ++k) {
        CHECK(a.outputs[k].name == b.outputs[k].name);
        CHECK(a.outputs[k].sha256 == b.outputs[k].sha256);
        CHECK(a.outputs[k].sha256 == c.outputs[k].sha256);
    }
    CHECK(a.experiment == "fig11-chaos");
    CHECK(!a.seeds.empty());
    for (const auto* d : {"a", "b", "c"}) fs::remove_all(scratch(d));
}

TEST_CASE("manifest verification")
{
    const auto dir = scratch("m");
    const auto m = harness::run(small_chaos(dir, 1));
    const auto manifest = dir / "manifest.json";
    REQUIRE(fs::exists(manifest));
    CHECK(harness::verify_manifest(manifest).empty());
    CHECK(m.outputs.front().sha256.size() == 64);
    CHECK(harness::sha256_file(dir / m.outputs.front().name) == m.outputs.front().sha256);

    std::ofstream(dir / m.outputs.front().name, std::ios::app) << "tampered\n";
    const auto bad = harness::verify_manifest(manifest);
    REQUIRE(bad.size() == 1);
    CHECK(bad.front() == m.outputs.front().name);
    fs::remove_all(dir);
}

TEST_CASE("invalid config is refused before running")
{
    auto c = small_chaos(scratch("bad"), 1);
    c.grid.sizes.clear();
    CHECK_THROWS_AS(harness::run(c), ConfigError);
}

TEST_CASE("sha256 of known input")
{
    const auto dir = scratch("sha");
    fs::create_directories(dir);
    std::ofstream(dir / "abc", std::ios::binary) << "abc";
    CHECK(harness::sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove_all(dir);
}

TEST_CASE("csv quoting round trips")
{
    const auto dir = scratch("csv");
    fs::create_directories(dir);
    {
        io::CsvWriter w(dir / "t.csv", {"name", "value"});
        w.field("plain").field(1.5);
        w.end_row();
        w.field("a,b").field(std::string_view("say \"hi\""));
        w.end_row();
        w.close();
    }
    const auto text = slurp(dir / "t.csv");
    CHECK(text.find("\"a,b\"") != std::string::npos);
    CHECK(text.find("\"say \"\"hi\"\"\"") != std::string::npos);
    CHECK(text.find("\r\n") != std::string::npos);
    const auto rows = io::read_csv(dir / "t.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[2][0] == "a,b");
    CHECK(rows[2][1] == "say \"hi\"");
    CHECK(io::format_double(0.1) == "0.1");
    fs::remove_all(dir);
}

TEST_CASE("seed streams")
{
    const auto a = derive_seed(1, "fig8", 3);
    const auto b = derive_seed(1, "fig8", 3);
    CHECK(a.hi == b.hi);
    CHECK(a.lo == b.lo);
    CHECK(fold_seed(a) != fold_seed(derive_seed(1, "fig8", 4)));
    CHECK(fold_seed(a) != fold_seed(derive_seed(1, "fig9", 3)));
    CHECK(fold_seed(a) != fold_seed(derive_seed(2, "fig8", 3)));
    Rng r1 = make_rng(a), r2 = make_rng(b);
    for (int k = 0; k < 10; ++k) CHECK(r1() == r2());
}
