#pragma once

#include "vaxdyn/errors.hpp"
#include "vaxdyn/fixed_point.hpp"
#include "vaxdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vaxdyn {

struct IntegrationConfig {
    double dt                 = 1e-3;
    double t_max              = 100.0;
    std::size_t record_every  = 1;
    double clamp_eps          = 0.0; ///< components are clamped to [-clamp_eps, 1 + clamp_eps]
    double convergence_tol    = 1e-9;
    double convergence_window = 10.0;

    void validate() const;

    /// Number of RK4 steps needed to reach t_max.
    std::size_t step_count() const;
    /// Number of consecutive step boundaries spanning `convergence_window`.
    std::size_t window_steps() const;
};

enum class TerminalReason { horizon_reached, converged, policy_stopped };

std::string to_string(TerminalReason r);

struct PolicyEvent {
    double time;
    double old_theta;
    double new_theta;
};

/// A clamp that moved a component by more than `kClampWarnThreshold`.
struct ClampEvent {
    double time;
    std::size_t component;
    double amount;
};

inline constexpr double kClampWarnThreshold = 1e-9;
inline constexpr std::size_t kMaxStoredClampEvents = 64;

template <std::size_t N>
struct Trajectory {
    std::vector<double> times;
    std::vector<StateVec<N>> states;
    std::vector<double> thetas; ///< theta in effect at each sample
    TerminalReason terminal_reason = TerminalReason::horizon_reached;
    std::vector<PolicyEvent> policy_events;
    std::vector<ClampEvent> clamp_warnings; ///< first kMaxStoredClampEvents only
    std::size_t clamp_warning_count = 0;
    std::size_t steps               = 0;

    const StateVec<N>& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }
};

/// Right-hand side of an N-dimensional system; theta is passed separately
/// because it is the one parameter a control policy may rewrite.
template <std::size_t N>
using VectorField = std::function<StateVec<N>(const StateVec<N>&, double theta)>;

struct StepDecision {
    double theta;
    bool stop = false;
};

/// Called at every step boundary (including t = 0 and the horizon) before the
/// step is taken. May rewrite theta or stop the run.
template <std::size_t N>
using StepHook = std::function<StepDecision(double t, const StateVec<N>& state)>;

VectorField<5> full_field(const ModelParams& p);
VectorField<2> reduced_field(const ModelParams& p);
/// Reduced field scaled by the (eps1, eps2) time-scale factors.
VectorField<2> slow_reduced_field(const ModelParams& p);

namespace detail {

template <std::size_t N>
double sup_norm(const StateVec<N>& v)
{
    double m = 0.0;
    for (double c : v) {
        m = std::max(m, std::fabs(c));
    }
    return m;
}

template <std::size_t N>
bool all_finite(const StateVec<N>& v)
{
    return std::all_of(v.begin(), v.end(), [](double c) { return std::isfinite(c); });
}

} // namespace detail

/**
 * Fixed-step classic RK4 with per-step clamping of every component into
 * [0,1] (widened by `clamp_eps`).
 *
 * At each step boundary k (t = k*dt): the hook (if any) picks theta, the
 * field is evaluated once (this is also the first RK stage), the sample is
 * recorded if k is a multiple of `record_every`, and the run stops if the
 * field sup-norm has stayed below `convergence_tol` over the last
 * `convergence_window` time units. The final state is always recorded.
 */
template <std::size_t N>
Trajectory<N> integrate(const VectorField<N>& rhs, const StateVec<N>& state0,
                        const IntegrationConfig& cfg, double theta,
                        const StepHook<N>& hook = {})
{
    cfg.validate();
    if (!detail::all_finite(state0)) {
        throw IntegrationDivergedError(0.0, "initial state is not finite");
    }

    const std::size_t total  = cfg.step_count();
    const std::size_t window = cfg.window_steps();
    const double dt          = cfg.dt;
    const double lo          = -cfg.clamp_eps;
    const double hi          = 1.0 + cfg.clamp_eps;

    Trajectory<N> traj;
    traj.times.reserve(total / cfg.record_every + 2);
    traj.states.reserve(total / cfg.record_every + 2);
    traj.thetas.reserve(total / cfg.record_every + 2);

    StateVec<N> s = state0;
    double current_theta = theta;
    std::size_t below    = 0;
    std::size_t k        = 0;

    auto record = [&](double t) {
        if (!traj.times.empty() && traj.times.back() == t) {
            return;
        }
        traj.times.push_back(t);
        traj.states.push_back(s);
        traj.thetas.push_back(current_theta);
    };

    for (;; ++k) {
        const double t = static_cast<double>(k) * dt;
        bool stop      = false;
        if (hook) {
            const StepDecision d = hook(t, s);
            if (d.theta != current_theta) {
                traj.policy_events.push_back({t, current_theta, d.theta});
                current_theta = d.theta;
            }
            stop = d.stop;
        }

        const StateVec<N> k1 = rhs(s, current_theta);
        if (detail::sup_norm(k1) < cfg.convergence_tol) {
            ++below;
        }
        else {
            below = 0;
        }

        if (k % cfg.record_every == 0) {
            record(t);
        }
        if (stop) {
            traj.terminal_reason = TerminalReason::policy_stopped;
            break;
        }
        if (below > window) {
            traj.terminal_reason = TerminalReason::converged;
            break;
        }
        if (k == total) {
            traj.terminal_reason = TerminalReason::horizon_reached;
            break;
        }

        StateVec<N> tmp;
        for (std::size_t c = 0; c < N; ++c) {
            tmp[c] = s[c] + 0.5 * dt * k1[c];
        }
        const StateVec<N> k2 = rhs(tmp, current_theta);
        for (std::size_t c = 0; c < N; ++c) {
            tmp[c] = s[c] + 0.5 * dt * k2[c];
        }
        const StateVec<N> k3 = rhs(tmp, current_theta);
        for (std::size_t c = 0; c < N; ++c) {
            tmp[c] = s[c] + dt * k3[c];
        }
        const StateVec<N> k4 = rhs(tmp, current_theta);

        const double t_next = static_cast<double>(k + 1) * dt;
        for (std::size_t c = 0; c < N; ++c) {
            const double raw = s[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            if (!std::isfinite(raw)) {
                throw IntegrationDivergedError(t_next, "integration diverged at t = " +
                                                           std::to_string(t_next));
            }
            const double clamped = std::clamp(raw, lo, hi);
            const double moved   = std::fabs(clamped - raw);
            if (moved > kClampWarnThreshold) {
                if (traj.clamp_warnings.size() < kMaxStoredClampEvents) {
                    traj.clamp_warnings.push_back({t_next, c, moved});
                }
                ++traj.clamp_warning_count;
            }
            s[c] = clamped;
        }
    }

    record(static_cast<double>(k) * dt);
    traj.steps = k;
    return traj;
}

/// Final state of one run of the lane-batched reduced integrator.
struct ReducedEndpoint {
    StateVec<2> state;
    TerminalReason terminal_reason;
    std::size_t steps;
};

/**
 * Integrates the reduced field from many starting points at once, stepping
 * several independent runs in lockstep. Each endpoint is bit-identical to
 * `integrate(reduced_field(p), start, cfg, p.theta).final_state()`.
 * No hook, no recording: intended for basin grids.
 */
std::vector<ReducedEndpoint> integrate_reduced_endpoints(const ModelParams& p,
                                                         std::span<const StateVec<2>> starts,
                                                         const IntegrationConfig& cfg);

/// Index into `candidates` of the fixed point reached, or nullopt when unresolved.
std::optional<std::size_t> classify_endpoint(double x, double n, TerminalReason reason,
                                             std::span<const FixedPoint> candidates, double tol);

template <std::size_t N>
std::optional<std::size_t> classify_endpoint(const Trajectory<N>& traj,
                                             std::span<const FixedPoint> candidates, double tol)
{
    static_assert(N >= 2);
    const StateVec<N>& s = traj.final_state();
    return classify_endpoint(s[N - 2], s[N - 1], traj.terminal_reason, candidates, tol);
}

} // namespace vaxdyn
