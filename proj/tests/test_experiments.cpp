#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "copcoal/experiments.hpp"
#include "copcoal/output.hpp"

using namespace copcoal;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("copcoal_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<ErrorKind> kinds_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return {e.kind()};
    }
    return {};
}

ExperimentConfig small_sweep(std::size_t threads) {
    return parse_config(json{{"experiment", "alpha_sweep"},
                             {"seed", 3},
                             {"trials", 4},
                             {"threads", threads},
                             {"network", {{"count", 10}, {"gaussian_count", 5}}},
                             {"energy", {{"alphas", {2, 4}}}},
                             {"mc", {{"n_samples", 2000}}}});
}

}  // namespace

TEST_CASE("number formatting and CSV") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(1.0) == "1");
    CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_real(std::nan("")) == "nan");
    CHECK(std::stod(format_real(std::numbers::pi)) == std::numbers::pi);
    CsvTable t({"a", "b"});
    t.add_row({"1", "x,y"});
    t.add_row({"2", "say \"hi\""});
    CHECK(t.str() == "a,b\n1,\"x,y\"\n2,\"say \"\"hi\"\"\"\n");
    CHECK_THROWS_AS(t.add_row({"only one"}), Error);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("config defaults") {
    const auto c = parse_config(json{{"experiment", "eight_sensor_game"}});
    CHECK(c.energy.t_barrier == 1.0);
    CHECK(c.mc.n_samples == 200000);
    CHECK(c.mc.fd_step == 1e-3);
    CHECK(c.network.count == 8);
    CHECK(c.network.source == Point{0.75, 0.75});
    CHECK(c.energy.alpha == 4.0);
    CHECK(c.variance_policy == VariancePolicy::PaperLiteral);
    REQUIRE(c.tasks.size() == 1);
    CHECK(std::holds_alternative<Estimation>(c.tasks[0]));

    const auto s = parse_config(json{{"experiment", "alpha_sweep"}});
    CHECK(s.trials == 100);
    CHECK(s.nu == 4.0);
    CHECK(s.copula == FamilyKind::StudentT);
    CHECK(s.network.count == 28);
    CHECK(s.network.gaussian_count == 14);
    CHECK(s.alphas == std::vector<double>{2, 3, 4, 5, 6});
    REQUIRE(s.tasks.size() == 2);
    CHECK(std::get<Detection>(s.tasks[1]).theta0 == 1.0);
    CHECK(std::get<Detection>(s.tasks[1]).theta1 == 2.4);

    const auto g = parse_config(json{{"experiment", "gkld_vs_tau"}});
    CHECK(std::get<Detection>(g.tasks[0]).theta1 == doctest::Approx(std::sqrt(2.0)));
    CHECK(g.families.size() == 4);
}

TEST_CASE("config violations are collected") {
    try {
        (void)parse_config(json{{"experiment", "alpha_sweep"},
                                {"trials", 0},
                                {"energy", {{"alphas", {3, 2}}}},
                                {"bogus", 1}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ErrorKind::SchemaViolation);
        auto has = [&](const std::string& field, const std::string& reason) {
            for (const auto& v : e.violations())
                if (v.field == field && v.reason == reason) return true;
            return false;
        };
        CHECK(has("trials", "must be >= 1"));
        CHECK(has("energy.alphas", "must be strictly increasing"));
        CHECK(has("bogus", "unknown key"));
    }
    CHECK(kinds_of([] { (void)parse_config(json{{"seed", 1}}); }) == std::vector{ErrorKind::SchemaViolation});
    CHECK(kinds_of([] { (void)parse_config(json{{"experiment", "gafi_vs_rho"}, {"seed", "x"}}); }) ==
          std::vector{ErrorKind::SchemaViolation});
}

TEST_CASE("parse errors name the line") {
    try {
        (void)parse_json_text("{\n  \"experiment\": \"gafi_vs_rho\",\n  \"seed\": ,\n}\n");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK(kinds_of([] { (void)validate_config("/nonexistent/config.json"); }) == std::vector{ErrorKind::Io});
}

TEST_CASE("resolved config round-trips") {
    const auto c = small_sweep(2);
    const auto again = parse_config(to_json(c));
    CHECK(to_json(again) == to_json(c));
    // a manifest is accepted as a config
    const json manifest = {{"manifest_version", 1}, {"config", to_json(c)}};
    CHECK(to_json(parse_config(manifest)) == to_json(c));
}

TEST_CASE("GAFI curve") {
    const auto cfg = parse_config(json{{"experiment", "gafi_vs_rho"}});
    const auto r = run_gafi_vs_rho(cfg);
    REQUIRE(r.rho.size() == 191);
    CHECK(r.rho.front() == -0.95);
    CHECK(r.rho.back() == 0.95);
    bool found_zero = false;
    for (std::size_t i = 0; i < r.rho.size(); ++i) {
        if (r.rho[i] == 0.0) {
            found_zero = true;
            CHECK(r.identical[i] == 0.0);
        }
        if (r.rho[i] > 0) CHECK(r.identical[i] <= 0.0);
        if (i > 0) CHECK(r.identical[i] < r.identical[i - 1]);
    }
    CHECK(found_zero);
    CHECK(r.heterogeneous_root == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(std::abs(pairwise_gafi_gaussian(1, 2, 1, 1, r.heterogeneous_root)) < 1e-10);
    const auto* csv = r.artifacts.find("gafi_vs_rho.csv");
    REQUIRE(csv);
    CHECK(csv->content.rfind("rho,gafi_identical,gafi_heterogeneous\n", 0) == 0);
    CHECK(r.artifacts.find("gafi_vs_rho.svg"));
}

TEST_CASE("GKLD curve on a coarse grid") {
    auto cfg = parse_config(json{{"experiment", "gkld_vs_tau"},
                                 {"mc", {{"n_samples", 20000}}},
                                 {"gkld", {{"tau_min", 0.1}, {"tau_max", 0.9}, {"tau_step", 0.2}}}});
    const auto r = run_gkld_vs_tau(cfg);
    REQUIRE(r.tau.size() == 5);
    REQUIRE(r.curves.size() == 4);
    const auto& g = r.curves[0];
    CHECK(g.family == FamilyKind::Gaussian);
    for (std::size_t i = 0; i < r.tau.size(); ++i) {
        const double rho = std::sin(std::numbers::pi * r.tau[i] / 2);
        CHECK(g.value[i] == doctest::Approx(-2.0 * rho / (1 + rho)).epsilon(1e-12));
        CHECK(g.value[i] < 0.0);
    }
    for (const auto& c : r.curves) CHECK(c.sign_changes <= 1);
    const auto* csv = r.artifacts.find("gkld_vs_tau.csv");
    REQUIRE(csv);
    CHECK(csv->content.rfind("tau,gaussian,gaussian_se,student_t,student_t_se,clayton,clayton_se,gumbel,gumbel_se\n", 0) ==
          0);
}

TEST_CASE("resolved signs") {
    CHECK(resolved_signs({1.0, -1.0, 0.1}, {0.1, 0.1, 0.1}) == std::vector<int>{1, -1, 0});
}

TEST_CASE("eight-sensor game") {
    const auto cfg = parse_config(json{{"experiment", "eight_sensor_game"}, {"seed", 1}});
    const auto r = run_eight_sensor_game(cfg);
    CHECK(r.sensors.size() == 8);
    CHECK(r.game.final_partition.max_coalition_size() <= 4);
    CHECK(r.dhp_stable);
    for (std::size_t k = 1; k < r.game.trace.size(); ++k)
        CHECK(r.game.trace[k].average_payoff >= r.game.trace[k - 1].average_payoff);
    const auto* trace = r.artifacts.find("trace.csv");
    REQUIRE(trace);
    CHECK(trace->content.rfind("step,op,coalitions,average_payoff,max_coalition_size,total_energy\n0,init,", 0) == 0);
    for (const char* name : {"deployment.csv", "partition.csv", "payoff_trace.svg", "partition_map.svg"})
        CHECK(r.artifacts.find(name));
    CHECK(r.artifacts.summary["dhp_stable"] == true);
}

TEST_CASE("alpha sweep is independent of thread count") {
    const auto one = run_alpha_sweep(small_sweep(1), RunOptions{false});
    const auto three = run_alpha_sweep(small_sweep(3), RunOptions{false});
    CHECK(one.trials_ok == 4);
    CHECK(one.artifacts.failures == 0);
    REQUIRE(one.artifacts.files.size() == three.artifacts.files.size());
    for (std::size_t i = 0; i < one.artifacts.files.size(); ++i) {
        CHECK(one.artifacts.files[i].name == three.artifacts.files[i].name);
        CHECK(one.artifacts.files[i].content == three.artifacts.files[i].content);
    }
    // proposed costs never exceed the baseline's at the smallest budget
    for (std::size_t k = 0; k < one.tasks.size(); ++k)
        for (std::size_t t = 0; t < 4; ++t) CHECK(one.proposed[k][0].cost[t] <= one.random[k][0].cost[t]);
}

TEST_CASE("manifest lists every file and reproduces from itself") {
    const auto cfg = parse_config(json{{"experiment", "eight_sensor_game"}, {"seed", 5}});
    const fs::path dir = scratch_dir("manifest");
    const json m = write_artifacts(run_experiment(cfg), cfg, dir);
    CHECK(m["manifest_version"] == 1);
    CHECK(m["seed"] == 5);
    CHECK(m["variance_policy"] == "paper_literal");
    for (const auto& f : m["files"]) {
        const std::string content = slurp(dir / f["name"].get<std::string>());
        CHECK(sha256_hex(content) == f["sha256"]);
        CHECK(content.size() == f["bytes"]);
    }
    // rerun from the written manifest
    const auto again = validate_config((dir / "manifest.json").string());
    const fs::path dir2 = scratch_dir("manifest2");
    const json m2 = write_artifacts(run_experiment(again), again, dir2);
    CHECK(m2["files"] == m["files"]);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("build network from explicit locations") {
    const auto cfg = parse_config(json{{"experiment", "eight_sensor_game"},
                                       {"network", {{"count", 3}, {"locations", {{0.1, 0.2}, {0.5, 0.5}, {1.2, 1.4}}}}}});
    Rng rng(1);
    const auto net = build_network(cfg, rng);
    REQUIRE(net.size() == 3);
    CHECK(net.sensor(2).location == Point{1.2, 1.4});
    const double d = distance(Point{0.5, 0.5}, Point{0.75, 0.75});
    CHECK(std::pow(std::get<GaussianMean>(net.sensor(1).marginal).sigma, 2) == doctest::Approx(1.0 / d));
}
