#pragma once

#include "vaxdyn/basins.hpp"
#include "vaxdyn/control.hpp"
#include "vaxdyn/equilibria.hpp"
#include "vaxdyn/integrator.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace vaxdyn {

/// Insertion-ordered so that emitted files keep a readable, stable layout.
using Json = nlohmann::ordered_json;

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest text that round-trips the double (printf %.17g).
std::string format_double(double v);

std::string trajectory_csv(const Trajectory<5>& traj); ///< t,S,I,R,x,n,theta
std::string trajectory_csv(const Trajectory<2>& traj); ///< t,x,n

Json params_json(const ModelParams& p, ModelKind kind);
Json integration_json(const IntegrationConfig& cfg);
Json fixed_point_json(const FixedPoint& fp);
Json regime_json(const RegimeReport& r);
Json equilibria_json(const ModelParams& p, const std::vector<FixedPoint>& fps,
                const RegimeReport& regime);

template <std::size_t N>
Json trajectory_summary_json(const Trajectory<N>& traj);

std::string basin_csv(const BasinReport& rep); ///< x_center,n_center,label
Json separatrix_json(const Separatrix& s);
Json basin_json(const ModelParams& p, const BasinReport& rep);

/// value,area_fp1,area_fp1_linear,area_unresolved,error
std::string sweep_csv(SweepParameter which, const std::vector<SweepPoint>& points);

Json policy_json(const ControlPolicy& policy);
Json control_report_json(const ControlReport& r);

/// Pretty-printed JSON text with a trailing newline.
std::string dump(const Json& j);

/// Phase-portrait SVG in the (x, n) unit square. Everything drawn comes from
/// the arguments; no timestamps or other metadata are embedded.
struct PhasePortrait {
    std::string title;
    std::vector<std::vector<StateVec<2>>> paths;
    std::vector<FixedPoint> points;
    const BasinReport* basin = nullptr;
    const Separatrix* separatrix = nullptr;
};

std::string phase_portrait_svg(const PhasePortrait& fig);

/// (x, n) projection of a trajectory, thinned to at most `max_points` samples.
template <std::size_t N>
std::vector<StateVec<2>> project_xn(const Trajectory<N>& traj, std::size_t max_points = 4000)
{
    std::vector<StateVec<2>> out;
    const std::size_t total  = traj.states.size();
    const std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, max_points));
    for (std::size_t k = 0; k < total; k += stride) {
        out.push_back({traj.states[k][N - 2], traj.states[k][N - 1]});
    }
    if (total > 0 && (total - 1) % stride != 0) {
        out.push_back({traj.states.back()[N - 2], traj.states.back()[N - 1]});
    }
    return out;
}

} // namespace vaxdyn
