#include "vaxdyn/control.hpp"

#include "vaxdyn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace vaxdyn {

std::string to_string(PolicyKind k)
{
    switch (k) {
    case PolicyKind::none:
        return "none";
    case PolicyKind::threshold:
        return "threshold";
    case PolicyKind::window:
        return "window";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name)
{
    if (name == "none") {
        return PolicyKind::none;
    }
    if (name == "threshold") {
        return PolicyKind::threshold;
    }
    if (name == "window") {
        return PolicyKind::window;
    }
    throw std::invalid_argument("unknown policy kind '" + name +
                                "' (expected none, threshold or window)");
}

ControlPolicy ControlPolicy::threshold(double i_threshold, double theta_controlled, bool latching)
{
    ControlPolicy p;
    p.kind             = PolicyKind::threshold;
    p.i_threshold      = i_threshold;
    p.theta_controlled = theta_controlled;
    p.latching         = latching;
    p.validate();
    return p;
}

ControlPolicy ControlPolicy::window(double t_start, double t_end, double theta_controlled)
{
    ControlPolicy p;
    p.kind             = PolicyKind::window;
    p.t_start          = t_start;
    p.t_end            = t_end;
    p.theta_controlled = theta_controlled;
    p.validate();
    return p;
}

void ControlPolicy::validate() const
{
    if (kind == PolicyKind::none) {
        return;
    }
    if (!(theta_controlled > 0.0) || !std::isfinite(theta_controlled)) {
        throw InvalidParameterError("policy theta_controlled must be > 0");
    }
    if (kind == PolicyKind::threshold && !(i_threshold > 0.0 && i_threshold < 1.0)) {
        throw InvalidParameterError("policy i_threshold must lie in (0, 1)");
    }
    if (kind == PolicyKind::window &&
        !(t_start < t_end && std::isfinite(t_start) && std::isfinite(t_end))) {
        throw InvalidParameterError("policy window requires t_start < t_end");
    }
}

double effective_theta(const ControlPolicy& policy, double t, const FullState& state,
                       double base_theta, bool latched)
{
    switch (policy.kind) {
    case PolicyKind::none:
        return base_theta;
    case PolicyKind::threshold:
        if ((policy.latching && latched) || state.i >= policy.i_threshold) {
            return policy.theta_controlled;
        }
        return base_theta;
    case PolicyKind::window:
        return policy.t_start < t && t < policy.t_end ? policy.theta_controlled : base_theta;
    }
    return base_theta;
}

StepHook<5> make_full_hook(const ControlPolicy& policy, double base_theta)
{
    policy.validate();
    if (policy.kind == PolicyKind::none) {
        return {};
    }
    auto latched = std::make_shared<bool>(false);
    return [policy, base_theta, latched](double t, const StateVec<5>& s) {
        const FullState st = FullState::from_array(s);
        const double th    = effective_theta(policy, t, st, base_theta, *latched);
        if (policy.kind == PolicyKind::threshold && st.i >= policy.i_threshold) {
            *latched = true;
        }
        return StepDecision{th};
    };
}

StepHook<2> make_reduced_hook(const ControlPolicy& policy, double base_theta)
{
    policy.validate();
    switch (policy.kind) {
    case PolicyKind::none:
        return {};
    case PolicyKind::threshold:
        throw InvalidParameterError(
            "threshold policy needs the infected fraction; use the full model");
    case PolicyKind::window:
        break;
    }
    return [policy, base_theta](double t, const StateVec<2>&) {
        return StepDecision{effective_theta(policy, t, FullState{}, base_theta)};
    };
}

template <std::size_t N>
ControlReport compare_runs(const Trajectory<N>& controlled, const Trajectory<N>& uncontrolled,
                           double tail_fraction)
{
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw InvalidParameterError("tail_fraction must lie in (0, 1]");
    }
    if (controlled.times.empty() || uncontrolled.times.empty()) {
        throw ComparisonError("cannot compare empty trajectories");
    }
    if (controlled.times != uncontrolled.times) {
        throw ComparisonError("trajectories do not share a time grid (" +
                              std::to_string(controlled.times.size()) + " vs " +
                              std::to_string(uncontrolled.times.size()) + " samples)");
    }
    if (controlled.states.front() != uncontrolled.states.front()) {
        throw ComparisonError("trajectories start from different initial states");
    }

    const std::size_t total = controlled.times.size();
    const auto tail = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(total))));
    const std::size_t first = total - std::min(tail, total);

    auto tail_stats = [&](const Trajectory<N>& tr, double& mean, double& amp) {
        double sum = 0.0;
        double lo  = tr.states[first][N - 2];
        double hi  = lo;
        for (std::size_t k = first; k < total; ++k) {
            const double x = tr.states[k][N - 2];
            sum += x;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        mean = sum / static_cast<double>(total - first);
        amp  = hi - lo;
    };

    ControlReport r;
    r.tail_fraction   = tail_fraction;
    r.tail_samples    = total - first;
    r.tail_start_time = controlled.times[first];
    tail_stats(controlled, r.mean_x_tail_controlled, r.amplitude_x_controlled);
    tail_stats(uncontrolled, r.mean_x_tail_uncontrolled, r.amplitude_x_uncontrolled);
    r.mean_x_tail_delta  = r.mean_x_tail_controlled - r.mean_x_tail_uncontrolled;
    r.n_end_controlled   = controlled.final_state()[N - 1];
    r.n_end_uncontrolled = uncontrolled.final_state()[N - 1];
    r.n_end_delta        = r.n_end_controlled - r.n_end_uncontrolled;
    return r;
}

template ControlReport compare_runs<2>(const Trajectory<2>&, const Trajectory<2>&, double);
template ControlReport compare_runs<5>(const Trajectory<5>&, const Trajectory<5>&, double);

} // namespace vaxdyn
