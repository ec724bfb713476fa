#pragma once

#include "vaxdyn/integrator.hpp"
#include "vaxdyn/model.hpp"

#include <memory>
#include <string>

namespace vaxdyn {

enum class PolicyKind { none, threshold, window };

std::string to_string(PolicyKind k);
PolicyKind parse_policy_kind(const std::string& name);

/// A rule that rewrites the side-effect bias theta during a run.
///
/// threshold: theta_controlled once I >= i_threshold at a step boundary
/// (and from then on, if latching). window: theta_controlled while
/// t_start < t < t_end.
struct ControlPolicy {
    PolicyKind kind         = PolicyKind::none;
    double i_threshold      = 0.0;
    double theta_controlled = 0.0;
    double t_start          = 0.0;
    double t_end            = 0.0;
    bool latching           = true;

    static ControlPolicy none() { return {}; }
    static ControlPolicy threshold(double i_threshold, double theta_controlled, bool latching = true);
    static ControlPolicy window(double t_start, double t_end, double theta_controlled);

    /// Throws InvalidParameterError when the fields required by `kind` are invalid.
    void validate() const;
};

/// Pure evaluation of the policy. `latched` says whether a latching threshold
/// policy has already fired earlier in the run.
double effective_theta(const ControlPolicy& policy, double t, const FullState& state,
                       double base_theta, bool latched = false);

/// Stateful per-run hook for the full model. Each call to this function
/// returns a fresh hook with its own latch, so one hook per run.
StepHook<5> make_full_hook(const ControlPolicy& policy, double base_theta);

/// Hook for the reduced model. Only none and window policies apply there:
/// the reduced state carries no infected fraction.
StepHook<2> make_reduced_hook(const ControlPolicy& policy, double base_theta);

struct ControlReport {
    double tail_fraction       = 0.25;
    std::size_t tail_samples   = 0;
    double tail_start_time     = 0.0;
    double mean_x_tail_controlled   = 0.0;
    double mean_x_tail_uncontrolled = 0.0;
    double mean_x_tail_delta   = 0.0; ///< controlled minus uncontrolled
    double n_end_controlled    = 0.0;
    double n_end_uncontrolled  = 0.0;
    double n_end_delta         = 0.0; ///< controlled minus uncontrolled
    double amplitude_x_controlled   = 0.0; ///< peak to trough over the tail
    double amplitude_x_uncontrolled = 0.0;
};

/// Compares two runs on the same time grid from the same initial state.
/// x and n are the last two components of each state. Throws ComparisonError
/// on mismatched grids or initial states, and InvalidParameterError unless
/// 0 < tail_fraction <= 1.
template <std::size_t N>
ControlReport compare_runs(const Trajectory<N>& controlled, const Trajectory<N>& uncontrolled,
                           double tail_fraction = 0.25);

/// Earliest sample time at which component `component` drops below `level`,
/// or a negative value if it never does.
template <std::size_t N>
double first_time_below(const Trajectory<N>& traj, std::size_t component, double level)
{
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        if (traj.states[k][component] < level) {
            return traj.times[k];
        }
    }
    return -1.0;
}

extern template ControlReport compare_runs<2>(const Trajectory<2>&, const Trajectory<2>&, double);
extern template ControlReport compare_runs<5>(const Trajectory<5>&, const Trajectory<5>&, double);

} // namespace vaxdyn
