#include "vaxdyn/integrator.hpp"

#include <cmath>
#include <limits>

namespace vaxdyn {

void IntegrationConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameterError("integration dt must be > 0");
    }
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw InvalidParameterError("integration t_max must be > 0");
    }
    if (record_every < 1) {
        throw InvalidParameterError("record_every must be >= 1");
    }
    if (!(clamp_eps >= 0.0)) {
        throw InvalidParameterError("clamp_eps must be >= 0");
    }
    if (!(convergence_tol > 0.0)) {
        throw InvalidParameterError("convergence_tol must be > 0");
    }
    if (!(convergence_window >= 0.0)) {
        throw InvalidParameterError("convergence_window must be >= 0");
    }
}

std::size_t IntegrationConfig::step_count() const
{
    // Tolerate t_max/dt landing a hair above an integer from rounding.
    return static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
}

std::size_t IntegrationConfig::window_steps() const
{
    return static_cast<std::size_t>(std::ceil(convergence_window / dt - 1e-9));
}

std::string to_string(TerminalReason r)
{
    switch (r) {
    case TerminalReason::horizon_reached:
        return "horizon_reached";
    case TerminalReason::converged:
        return "converged";
    case TerminalReason::policy_stopped:
        return "policy_stopped";
    }
    return "unknown";
}

VectorField<5> full_field(const ModelParams& p)
{
    return [p](const StateVec<5>& s, double theta) {
        ModelParams q = p;
        q.theta       = theta;
        return full_rhs(FullState::from_array(s), q).as_array();
    };
}

VectorField<2> reduced_field(const ModelParams& p)
{
    return [p](const StateVec<2>& s, double theta) {
        StateVec<2> d;
        detail::reduced_field(s[0], s[1], p.r0, p.cost_infection, p.cost_vacc_high,
                              p.cost_vacc_low, theta, d[0], d[1]);
        return d;
    };
}

VectorField<2> slow_reduced_field(const ModelParams& p)
{
    return [p](const StateVec<2>& s, double theta) {
        StateVec<2> d;
        detail::reduced_field(s[0], s[1], p.r0, p.cost_infection, p.cost_vacc_high,
                              p.cost_vacc_low, theta, d[0], d[1]);
        return StateVec<2>{p.eps1 * d[0], p.eps2 * d[1]};
    };
}

namespace {

constexpr std::size_t kLanes = 16;

struct LaneBlock {
    alignas(64) double x[kLanes];
    alignas(64) double n[kLanes];
    alignas(64) double a1[kLanes], b1[kLanes];
    alignas(64) double a2[kLanes], b2[kLanes];
    alignas(64) double a3[kLanes], b3[kLanes];
    alignas(64) double a4[kLanes], b4[kLanes];
    alignas(64) double tx[kLanes], tn[kLanes];
};

struct FieldConstants {
    double r0, c, vh, vl, theta;
};

inline void eval_lanes(const FieldConstants& k, const double* __restrict x,
                       const double* __restrict n, double* __restrict dx, double* __restrict dn)
{
    for (std::size_t l = 0; l < kLanes; ++l) {
        detail::reduced_field(x[l], n[l], k.r0, k.c, k.vh, k.vl, k.theta, dx[l], dn[l]);
    }
}

} // namespace

std::vector<ReducedEndpoint> integrate_reduced_endpoints(const ModelParams& p,
                                                         std::span<const StateVec<2>> starts,
                                                         const IntegrationConfig& cfg)
{
    cfg.validate();
    std::vector<ReducedEndpoint> out(starts.size());
    if (starts.empty()) {
        return out;
    }

    const FieldConstants fc{p.r0, p.cost_infection, p.cost_vacc_high, p.cost_vacc_low, p.theta};
    const std::size_t total  = cfg.step_count();
    const std::size_t window = cfg.window_steps();
    const double dt          = cfg.dt;
    const double tol         = cfg.convergence_tol;
    const double lo          = -cfg.clamp_eps;
    const double hi          = 1.0 + cfg.clamp_eps;

    for (const auto& s : starts) {
        if (!std::isfinite(s[0]) || !std::isfinite(s[1])) {
            throw IntegrationDivergedError(0.0, "initial state is not finite");
        }
    }

    LaneBlock b;
    std::size_t lane_job[kLanes];
    std::size_t lane_step[kLanes];
    std::size_t lane_below[kLanes];
    bool lane_live[kLanes];
    std::size_t next = 0;
    std::size_t live = 0;

    // Loads the next start into lane l and evaluates its first stage; lanes that
    // terminate immediately are retired in a loop until a live job is found.
    auto finish_or_continue = [&](std::size_t l) -> bool {
        const double norm = std::fmax(std::fabs(b.a1[l]), std::fabs(b.b1[l]));
        if (norm < tol) {
            ++lane_below[l];
        }
        else {
            lane_below[l] = 0;
        }
        TerminalReason reason;
        if (lane_below[l] > window) {
            reason = TerminalReason::converged;
        }
        else if (lane_step[l] == total) {
            reason = TerminalReason::horizon_reached;
        }
        else {
            return false;
        }
        out[lane_job[l]] = {{b.x[l], b.n[l]}, reason, lane_step[l]};
        return true;
    };

    auto load = [&](std::size_t l) {
        while (next < starts.size()) {
            lane_job[l]   = next;
            lane_step[l]  = 0;
            lane_below[l] = 0;
            b.x[l]        = starts[next][0];
            b.n[l]        = starts[next][1];
            ++next;
            detail::reduced_field(b.x[l], b.n[l], fc.r0, fc.c, fc.vh, fc.vl, fc.theta, b.a1[l],
                                  b.b1[l]);
            if (!finish_or_continue(l)) {
                lane_live[l] = true;
                ++live;
                return;
            }
        }
        lane_live[l] = false;
        b.x[l]       = 0.5;
        b.n[l]       = 0.5;
    };

    for (std::size_t l = 0; l < kLanes; ++l) {
        load(l);
    }

    while (live > 0) {
        for (std::size_t l = 0; l < kLanes; ++l) {
            b.tx[l] = b.x[l] + 0.5 * dt * b.a1[l];
            b.tn[l] = b.n[l] + 0.5 * dt * b.b1[l];
        }
        eval_lanes(fc, b.tx, b.tn, b.a2, b.b2);
        for (std::size_t l = 0; l < kLanes; ++l) {
            b.tx[l] = b.x[l] + 0.5 * dt * b.a2[l];
            b.tn[l] = b.n[l] + 0.5 * dt * b.b2[l];
        }
        eval_lanes(fc, b.tx, b.tn, b.a3, b.b3);
        for (std::size_t l = 0; l < kLanes; ++l) {
            b.tx[l] = b.x[l] + dt * b.a3[l];
            b.tn[l] = b.n[l] + dt * b.b3[l];
        }
        eval_lanes(fc, b.tx, b.tn, b.a4, b.b4);
        for (std::size_t l = 0; l < kLanes; ++l) {
            b.tx[l] = b.x[l] + dt / 6.0 * (b.a1[l] + 2.0 * b.a2[l] + 2.0 * b.a3[l] + b.a4[l]);
            b.tn[l] = b.n[l] + dt / 6.0 * (b.b1[l] + 2.0 * b.b2[l] + 2.0 * b.b3[l] + b.b4[l]);
        }
        for (std::size_t l = 0; l < kLanes; ++l) {
            if (!lane_live[l]) {
                continue;
            }
            ++lane_step[l];
            if (!std::isfinite(b.tx[l]) || !std::isfinite(b.tn[l])) {
                const double t = static_cast<double>(lane_step[l]) * dt;
                throw IntegrationDivergedError(t, "integration diverged at t = " +
                                                      std::to_string(t));
            }
            b.x[l] = std::clamp(b.tx[l], lo, hi);
            b.n[l] = std::clamp(b.tn[l], lo, hi);
        }
        eval_lanes(fc, b.x, b.n, b.a1, b.b1);
        for (std::size_t l = 0; l < kLanes; ++l) {
            if (lane_live[l] && finish_or_continue(l)) {
                --live;
                load(l);
            }
        }
    }
    return out;
}

std::optional<std::size_t> classify_endpoint(double x, double n, TerminalReason reason,
                                             std::span<const FixedPoint> candidates, double tol)
{
    if (candidates.empty()) {
        throw std::invalid_argument("classify_endpoint requires at least one candidate");
    }
    if (reason == TerminalReason::horizon_reached) {
        return std::nullopt;
    }
    std::optional<std::size_t> hit;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double d = std::hypot(x - candidates[c].location.x, n - candidates[c].location.n);
        if (d <= tol) {
            if (hit) {
                throw AmbiguousEndpointError(
                    "final state lies within tolerance of fixed points " +
                    std::to_string(candidates[*hit].id) + " and " +
                    std::to_string(candidates[c].id) + "; tolerance too large");
            }
            hit = c;
        }
    }
    return hit;
}

} // namespace vaxdyn
