#include <iostream>

#include <CLI11.hpp>

#include "shs/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic Hunter-Saxton characteristics lab"};
    app.require_subcommand(1, 1);

    std::string scenario_path;
    shs::RunOptions opt;
    const std::pair<const char*, const char*> commands[] = {
        {"simulate", "one path: closed-form Lagrangian series and breakpoint trajectories"},
        {"ensemble", "ensemble means and standard errors on a subsampled grid"},
        {"law", "breaking-time CDF: quadrature against Monte Carlo"},
        {"slice", "Eulerian snapshots (x, q, u) of one path"},
        {"deterministic", "sigma = 0 reference slices and defect ledger"},
        {"verify", "run the verification suite; exit 1 on any failed check"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", opt.out_dir, "output directory (overrides outputs.directory)");
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--force", opt.force, "write into a non-empty output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? shs::kExitOk : shs::kExitBadScenario;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        shs::Scenario s = shs::load_scenario(scenario_path);
        shs::apply_seed_override(s);
        return shs::run_command(command, s, opt, std::cout);
    } catch (const shs::ScenarioError& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return shs::kExitBadScenario;
    } catch (const shs::OutputCollision& e) {
        std::cerr << e.what() << "\n";
        return shs::kExitOutputCollision;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return shs::kExitRuntime;
    }
}
