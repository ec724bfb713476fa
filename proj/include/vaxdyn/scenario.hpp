#pragma once

#include "vaxdyn/basins.hpp"
#include "vaxdyn/control.hpp"
#include "vaxdyn/integrator.hpp"
#include "vaxdyn/model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vaxdyn {

enum class Analysis { simulate, equilibria, basin, sweep, control_compare };

std::string to_string(Analysis a);
/// Accepts the command spellings: simulate, equilibria, basin, sweep, control-compare.
Analysis parse_analysis(const std::string& name);

/// One scenario file, validated. See the README for the grammar.
struct ScenarioConfig {
    std::string name;
    ModelKind model   = ModelKind::reduced;
    Analysis analysis = Analysis::simulate;
    ModelParams params;

    std::vector<double> x0;
    std::vector<double> n0;
    double i0 = 0.1;

    IntegrationConfig integration;

    ControlPolicy policy;
    double tail_fraction = 0.25;

    int grid_n          = 101;
    double classify_tol = 1e-3;

    SweepParameter sweep_parameter = SweepParameter::theta;
    std::vector<double> sweep_values;

    std::string out_dir;
    bool svg = false;
};

/// Parses scenario text. `origin` names the source in messages.
/// Throws ConfigError carrying the offending "section.key".
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");

ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Checks that everything `analysis` needs is present and consistent.
/// Throws ConfigError.
void validate_for(const ScenarioConfig& cfg, Analysis analysis);

} // namespace vaxdyn
