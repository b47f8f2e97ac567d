#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shs/characteristics.hpp"
#include "shs/diagnostics.hpp"

namespace shs {

/// Invalid scenario; `pointer` is the JSON pointer of the offending key.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& pointer, const std::string& what)
        : std::runtime_error((pointer.empty() ? std::string("/") : pointer) + ": " + what), pointer(pointer) {}
    std::string pointer;
};

struct Scenario {
    SigmaSpec sigma{1.0, 0.0};
    /// Preset text when given as "box(V0, a, b)", empty for an inline table.
    std::string preset;
    StepInitialData initial = StepInitialData::box(-1.0, 0.0, 1.0);
    TimeGrid grid{4.0, 4000};
    ContinuationMode mode = ContinuationMode::Conservative;
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 1;
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json"};
    /// Times for `slice`, `deterministic` and `law`; empty selects defaults.
    std::vector<double> times;
    /// q0 values for `law`; empty selects the negative box values.
    std::vector<double> law_q0;

    Experiment experiment(unsigned threads) const;
};

/// "box(V0, a, b)" -> StepInitialData. Throws ScenarioError at `pointer` on anything else.
StepInitialData parse_preset(const std::string& text, const std::string& pointer = "/initial");

Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

/// FNV-1a of the canonical dump of the resolved scenario, as 16 hex digits.
std::string scenario_hash(const Scenario& s);

/// Applies SHS_SEED if set. Throws ScenarioError("/ensemble/master_seed") when it does not parse.
void apply_seed_override(Scenario& s);

}  // namespace shs
