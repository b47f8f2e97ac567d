#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "shs/commands.hpp"
#include "shs/scenario.hpp"

using namespace shs;
using nlohmann::json;

namespace {

std::string pointer_of(const json& j) {
    try {
        scenario_from_json(j);
    } catch (const ScenarioError& e) {
        return e.pointer;
    }
    return "none";
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto d = std::filesystem::temp_directory_path() / ("shs_test_" + name);
    std::filesystem::remove_all(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("defaults and round trip") {
    const Scenario s = scenario_from_json(json::object());
    CHECK(s.sigma.slope == 1.0);
    CHECK(s.grid.n_steps == 4000);
    CHECK(s.initial.values == std::vector<double>{-1.0});

    const json j = json::parse(R"j({"sigma": {"slope": 0.5, "intercept": 0.1}, "initial": "box(2, -1, 0.5)",
                                   "grid": {"t_end": 2, "n_steps": 100}, "mode": "dissipative",
                                   "ensemble": {"n_paths": 7, "master_seed": 9}, "times": [0, 1]})j");
    const Scenario t = scenario_from_json(j);
    CHECK(t.initial.breakpoints == std::vector<double>{-1.0, 0.5});
    CHECK(t.mode == ContinuationMode::Dissipative);
    const Scenario back = scenario_from_json(scenario_to_json(t));
    CHECK(scenario_hash(back) == scenario_hash(t));
    CHECK(scenario_to_json(back) == scenario_to_json(t));

    const Scenario inline_data = scenario_from_json(json::parse(R"j({"initial": {"breakpoints": [0, 1, 2], "values": [1, -1]}})j"));
    CHECK(inline_data.initial.n_boxes() == 2);
}

TEST_CASE("hash") {
    Scenario a = scenario_from_json(json::object());
    Scenario b = a;
    b.out_dir = "elsewhere";
    CHECK(scenario_hash(a) == scenario_hash(b));
    CHECK(scenario_hash(a).size() == 16);
    b.master_seed = 2;
    CHECK(scenario_hash(a) != scenario_hash(b));
}

TEST_CASE("errors carry the offending pointer") {
    CHECK(pointer_of(json::parse(R"j({"sigma": {"slope": "x"}})j")) == "/sigma/slope");
    CHECK(pointer_of(json::parse(R"j({"grid": {"n_steps": -3}})j")) == "/grid/n_steps");
    CHECK(pointer_of(json::parse(R"j({"grid": {"t_end": 0}})j")) == "/grid/t_end");
    CHECK(pointer_of(json::parse(R"j({"gird": {}})j")) == "/gird");
    CHECK(pointer_of(json::parse(R"j({"initial": "triangle(1)"})j")) == "/initial");
    CHECK(pointer_of(json::parse(R"j({"initial": "box(1, 2, 1)"})j")) == "/initial");
    CHECK(pointer_of(json::parse(R"j({"initial": {"breakpoints": [0, 1], "values": [1, 2]}})j")) == "/initial");
    CHECK(pointer_of(json::parse(R"j({"mode": "lossy"})j")) == "/mode");
    CHECK(pointer_of(json::parse(R"j({"outputs": {"formats": ["csv", "xml"]}})j")) == "/outputs/formats/1");
    CHECK(pointer_of(json::parse(R"j({"times": [0, 9]})j")) == "/times/1");
    CHECK(pointer_of(json::parse(R"j({"ensemble": {"n_paths": 0}})j")) == "/ensemble/n_paths");
    CHECK(pointer_of(json::parse("[1, 2]")) == "/");
}

TEST_CASE("seed override") {
    Scenario s;
    setenv("SHS_SEED", "4242", 1);
    apply_seed_override(s);
    CHECK(s.master_seed == 4242);
    setenv("SHS_SEED", "12abc", 1);
    CHECK_THROWS_AS(apply_seed_override(s), ScenarioError);
    unsetenv("SHS_SEED");
}

}

TEST_SUITE("commands") {

TEST_CASE("number formatting round-trips") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23}) CHECK(std::stod(format_number(x)) == x);
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-kInfinity) == "-inf");
}

TEST_CASE("output directory collision") {
    Scenario s;
    s.grid = {1.0, 20};
    s.n_paths = 5;
    RunOptions opt;
    opt.out_dir = scratch_dir("collision").string();
    std::ostringstream log;
    CHECK(run_command("simulate", s, opt, log) == kExitOk);
    CHECK_THROWS_AS(run_command("simulate", s, opt, log), OutputCollision);
    opt.force = true;
    CHECK(run_command("simulate", s, opt, log) == kExitOk);
    CHECK_THROWS_AS(run_command("plot", s, opt, log), std::invalid_argument);
}

TEST_CASE("artifacts are reproducible and carry hash and seed") {
    Scenario s;
    s.grid = {2.0, 200};
    s.n_paths = 40;
    s.master_seed = 77;
    std::ostringstream log;
    RunOptions one{scratch_dir("rep1").string(), 1, false};
    RunOptions two{scratch_dir("rep2").string(), 3, false};
    for (const char* cmd : {"simulate", "ensemble", "slice"}) {
        one.force = two.force = true;
        CHECK(run_command(cmd, s, one, log) == kExitOk);
        CHECK(run_command(cmd, s, two, log) == kExitOk);
    }
    for (const char* file : {"simulate.csv", "path.csv", "ensemble.csv", "slice.csv"}) {
        const std::string a = slurp(std::filesystem::path(one.out_dir) / file);
        CHECK(a == slurp(std::filesystem::path(two.out_dir) / file));
        CHECK(a.find("# scenario_hash=" + scenario_hash(s)) != std::string::npos);
        CHECK(a.find("# master_seed=77") != std::string::npos);
    }
    const json resolved = json::parse(slurp(std::filesystem::path(one.out_dir) / "scenario.json"));
    CHECK(scenario_hash(scenario_from_json(resolved)) == scenario_hash(s));
}

TEST_CASE("deterministic command writes the ledger") {
    Scenario s;
    s.sigma = {0.0, 0.0};
    s.times = {1.0, 3.0};
    RunOptions opt{scratch_dir("det").string(), 1, false};
    std::ostringstream log;
    CHECK(run_command("deterministic", s, opt, log) == kExitOk);
    const json led = json::parse(slurp(std::filesystem::path(opt.out_dir) / "ledger.json"));
    CHECK(led["ledger"][1]["total"].get<double>() == 1.0);
    CHECK(led["ledger"][0]["atoms"].empty());
}

}
