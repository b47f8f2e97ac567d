#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "shs/diagnostics.hpp"
#include "shs/scenario.hpp"

namespace shs {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitBadScenario = 2,
    kExitOutputCollision = 3,
    kExitRuntime = 4,
};

struct RunOptions {
    /// Overrides the scenario's output directory when non-empty.
    std::string out_dir;
    unsigned threads = 1;
    bool force = false;
};

class OutputCollision : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Creates the output directory. Throws OutputCollision if it exists and is not empty, unless `force`.
std::string prepare_output(const Scenario& s, const RunOptions& opt);

/// Shortest round-trip text of x; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

/// Runs one subcommand ("simulate", "ensemble", "law", "slice", "deterministic", "verify") and returns its exit code.
int run_command(const std::string& command, const Scenario& s, const RunOptions& opt, std::ostream& log);

/// The verification suite behind `verify`, scaled to the scenario.
std::vector<CheckResult> verification_suite(const Scenario& s, unsigned threads);

}  // namespace shs
