#include "common.hpp"

#include "vaxdyn/equilibria.hpp"
#include "vaxdyn/integrator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace vaxdyn;
using vaxdyn::testing::two_basin;

namespace {

IntegrationConfig config(double dt, double t_max)
{
    IntegrationConfig c;
    c.dt    = dt;
    c.t_max = t_max;
    return c;
}

} // namespace

TEST(Integrate, ZeroFieldKeepsState)
{
    const VectorField<2> zero = [](const StateVec<2>&, double) { return StateVec<2>{0.0, 0.0}; };
    IntegrationConfig c       = config(1e-2, 5.0);
    const auto tr             = integrate<2>(zero, {0.3, 0.7}, c, 1.0);
    for (const auto& s : tr.states) {
        EXPECT_EQ(s[0], 0.3);
        EXPECT_EQ(s[1], 0.7);
    }
    EXPECT_EQ(tr.terminal_reason, TerminalReason::horizon_reached);
    EXPECT_DOUBLE_EQ(tr.final_time(), 5.0);
}

TEST(Integrate, ZeroFieldConvergesAfterWindow)
{
    const VectorField<2> zero = [](const StateVec<2>&, double) { return StateVec<2>{0.0, 0.0}; };
    IntegrationConfig c       = config(1e-2, 100.0);
    c.convergence_window      = 1.0;
    const auto tr             = integrate<2>(zero, {0.3, 0.7}, c, 1.0);
    EXPECT_EQ(tr.terminal_reason, TerminalReason::converged);
    EXPECT_NEAR(tr.final_time(), 1.0, 0.011);
}

TEST(Integrate, ExponentialDecayMatchesClosedForm)
{
    const VectorField<1> decay = [](const StateVec<1>& u, double) { return StateVec<1>{-u[0]}; };
    const auto tr              = integrate<1>(decay, {1.0}, config(1e-3, 1.0), 0.0);
    EXPECT_EQ(tr.steps, 1000u);
    EXPECT_NEAR(tr.final_state()[0], 0.36787944117144232160, 1e-10);
}

TEST(Integrate, TimesStrictlyIncreasingAndAligned)
{
    IntegrationConfig c = config(1e-3, 3.0);
    c.record_every      = 7;
    const auto tr       = integrate<2>(reduced_field(two_basin()), {0.4, 0.4}, c, 1.0);
    ASSERT_EQ(tr.times.size(), tr.states.size());
    ASSERT_EQ(tr.times.size(), tr.thetas.size());
    for (std::size_t k = 1; k < tr.times.size(); ++k) {
        EXPECT_LT(tr.times[k - 1], tr.times[k]);
    }
    // 3000 steps, every 7th sampled (0..2996) plus the final state.
    EXPECT_EQ(tr.times.size(), 3000u / 7 + 2);
    EXPECT_DOUBLE_EQ(tr.final_time(), 3.0);
}

TEST(Integrate, FullModelPopulationRelaxesExactly)
{
    const ModelParams p = vaxdyn::testing::scare_full(0.5);
    const FullState s0  = epidemic_initial_state(0.1, 0.9);
    IntegrationConfig c = config(1e-3, 20.0);
    c.record_every      = 100;
    const auto tr       = integrate<5>(full_field(p), s0.as_array(), c, p.theta);
    const double n0     = s0.total();
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const auto& s      = tr.states[k];
        const double total = s[0] + s[1] + s[2];
        EXPECT_NEAR(total - 1.0, (n0 - 1.0) * std::exp(-p.mu * tr.times[k]), 1e-8);
    }
}

TEST(Integrate, RungeKuttaIsFourthOrder)
{
    // Short horizon from (0.5, 0.5) stays below the herd-immunity kink.
    const auto field = reduced_field(two_basin());
    auto endpoint    = [&](double dt) {
        return integrate<2>(field, {0.5, 0.5}, config(dt, 1.0), 1.0).final_state();
    };
    const auto ref   = endpoint(0.1 / 8);
    const auto coarse = endpoint(0.1);
    const auto fine   = endpoint(0.05);
    auto err          = [&](const StateVec<2>& s) {
        return std::hypot(s[0] - ref[0], s[1] - ref[1]);
    };
    const double ratio = err(coarse) / err(fine);
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
}

TEST(Integrate, InteriorRunsNeverNeedLargeClamps)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int trial = 0; trial < 10; ++trial) {
        const ModelParams p = vaxdyn::testing::random_reduced(rng);
        const auto tr = integrate<2>(reduced_field(p), {u(rng), u(rng)}, config(1e-3, 50.0), p.theta);
        EXPECT_EQ(tr.clamp_warning_count, 0u);
    }
}

TEST(Integrate, ClampsAndLogsOvershoot)
{
    const VectorField<1> push = [](const StateVec<1>&, double) { return StateVec<1>{1.0}; };
    const auto tr             = integrate<1>(push, {0.95}, config(0.1, 1.0), 0.0);
    EXPECT_EQ(tr.final_state()[0], 1.0);
    EXPECT_GT(tr.clamp_warning_count, 0u);
    ASSERT_FALSE(tr.clamp_warnings.empty());
    EXPECT_NEAR(tr.clamp_warnings.front().amount, 0.05, 1e-12);
}

TEST(Integrate, NonFiniteStateThrowsWithTime)
{
    const VectorField<1> blow = [](const StateVec<1>& u, double) {
        return StateVec<1>{u[0] > 0.2 ? std::numeric_limits<double>::infinity() : 1.0};
    };
    try {
        integrate<1>(blow, {0.0}, config(0.1, 5.0), 0.0);
        FAIL() << "expected IntegrationDivergedError";
    }
    catch (const IntegrationDivergedError& e) {
        // The step leaving u = 0.2 is the first to hit the infinite branch.
        EXPECT_NEAR(e.time(), 0.3, 1e-12);
    }
}

TEST(Integrate, HookRewritesThetaAndRecordsEvents)
{
    const StepHook<2> hook = [](double t, const StateVec<2>&) {
        return StepDecision{t >= 1.0 ? 0.25 : 1.0};
    };
    const auto tr = integrate<2>(reduced_field(two_basin()), {0.4, 0.4}, config(1e-2, 2.0), 1.0, hook);
    ASSERT_EQ(tr.policy_events.size(), 1u);
    EXPECT_NEAR(tr.policy_events[0].time, 1.0, 1e-12);
    EXPECT_EQ(tr.policy_events[0].old_theta, 1.0);
    EXPECT_EQ(tr.policy_events[0].new_theta, 0.25);
    EXPECT_EQ(tr.thetas.back(), 0.25);
}

TEST(Integrate, HookCanStopRun)
{
    const StepHook<2> hook = [](double t, const StateVec<2>&) { return StepDecision{1.0, t >= 0.5}; };
    const auto tr = integrate<2>(reduced_field(two_basin()), {0.4, 0.4}, config(1e-2, 2.0), 1.0, hook);
    EXPECT_EQ(tr.terminal_reason, TerminalReason::policy_stopped);
    EXPECT_NEAR(tr.final_time(), 0.5, 1e-9);
}

TEST(Integrate, RejectsInvalidConfig)
{
    const auto f = reduced_field(two_basin());
    IntegrationConfig c;
    c.dt = 0.0;
    EXPECT_THROW(integrate<2>(f, {0.5, 0.5}, c, 1.0), InvalidParameterError);
    c              = IntegrationConfig{};
    c.record_every = 0;
    EXPECT_THROW(integrate<2>(f, {0.5, 0.5}, c, 1.0), InvalidParameterError);
    c                 = IntegrationConfig{};
    c.convergence_tol = 0.0;
    EXPECT_THROW(integrate<2>(f, {0.5, 0.5}, c, 1.0), InvalidParameterError);
}

TEST(Integrate, RerunsAreBitIdentical)
{
    const ModelParams p = vaxdyn::testing::scare_full(0.99);
    const FullState s0  = epidemic_initial_state(0.9, 0.1);
    const auto a        = integrate<5>(full_field(p), s0.as_array(), config(1e-3, 30.0), p.theta);
    const auto b        = integrate<5>(full_field(p), s0.as_array(), config(1e-3, 30.0), p.theta);
    EXPECT_EQ(a.times, b.times);
    EXPECT_EQ(a.states, b.states);
}

TEST(BatchedEndpoints, BitIdenticalToScalarIntegrator)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ModelParams p = two_basin();
    std::vector<StateVec<2>> starts;
    for (int k = 0; k < 53; ++k) {
        starts.push_back({u(rng), u(rng)});
    }
    starts.push_back({0.0, 1.0}); // a fixed point: converges after the window
    IntegrationConfig c   = config(1e-3, 150.0);
    const auto batch      = integrate_reduced_endpoints(p, starts, c);
    const auto field      = reduced_field(p);
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const auto tr = integrate<2>(field, starts[k], c, p.theta);
        EXPECT_EQ(batch[k].state, tr.final_state()) << "start " << k;
        EXPECT_EQ(batch[k].terminal_reason, tr.terminal_reason) << "start " << k;
        EXPECT_EQ(batch[k].steps, tr.steps) << "start " << k;
    }
}

TEST(ClassifyEndpoint, FindsTheTwoAttractors)
{
    const ModelParams p = two_basin();
    const auto fps      = enumerate_fixed_points(p);
    const std::vector<FixedPoint> cands{fps[0], fps[1]};
    IntegrationConfig c = config(1e-3, 2000.0);

    const auto hi = integrate<2>(reduced_field(p), {0.9, 0.1}, c, p.theta);
    EXPECT_EQ(hi.terminal_reason, TerminalReason::converged);
    EXPECT_EQ(classify_endpoint(hi, cands, 1e-3), std::optional<std::size_t>(0));
    EXPECT_NEAR(hi.final_state()[0], 0.682540, 1e-4);

    const auto lo = integrate<2>(reduced_field(p), {0.1, 0.9}, c, p.theta);
    EXPECT_EQ(classify_endpoint(lo, cands, 1e-3), std::optional<std::size_t>(1));
    EXPECT_NEAR(lo.final_state()[0], 0.591837, 1e-4);
}

TEST(ClassifyEndpoint, EdgeCases)
{
    const auto fps = enumerate_fixed_points(two_basin());
    const std::vector<FixedPoint> cands{fps[0], fps[1]};
    const auto& a = fps[0].location;
    EXPECT_EQ(classify_endpoint(a.x, a.n, TerminalReason::converged, cands, 1e-3),
              std::optional<std::size_t>(0));
    EXPECT_EQ(classify_endpoint(a.x, a.n, TerminalReason::horizon_reached, cands, 1e-3),
              std::nullopt);
    EXPECT_EQ(classify_endpoint(0.1, 0.5, TerminalReason::converged, cands, 1e-3), std::nullopt);
    EXPECT_THROW(classify_endpoint(a.x, a.n, TerminalReason::converged, cands, 5.0),
                 AmbiguousEndpointError);
    EXPECT_THROW(classify_endpoint(a.x, a.n, TerminalReason::converged, {}, 1e-3),
                 std::invalid_argument);
}
