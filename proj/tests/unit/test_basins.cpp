#include "common.hpp"

#include "vaxdyn/basins.hpp"
#include "vaxdyn/errors.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace vaxdyn;
using vaxdyn::testing::two_basin;

namespace {

IntegrationConfig basin_cfg()
{
    IntegrationConfig c;
    c.dt    = 1e-3;
    c.t_max = 2000.0;
    return c;
}

/// Random parameters in the interval where both fp1 and fp2 are stable.
ModelParams random_bistable(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        ModelParams p          = vaxdyn::testing::random_reduced(rng);
        const RegimeThresholds t = regime_thresholds(p);
        const double lo          = std::fmax(t.saddle_lo, t.fp2_exists);
        if (!(lo < t.saddle_hi)) {
            continue;
        }
        p.r0 = lo + (t.saddle_hi - lo) * (0.02 + 0.96 * u(rng));
        return p;
    }
}

} // namespace

TEST(Separatrix, TwoBasinExample)
{
    const ModelParams p = two_basin();
    const Separatrix s  = separatrix_linear(p);
    EXPECT_NEAR(s.saddle.x, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.saddle.n, 3.0 / 14.0, 1e-15);
    EXPECT_GT(s.lambda_pos, 0.0);
    EXPECT_LT(s.lambda_neg, 0.0);
    EXPECT_LT(std::fabs(s.saddle.n - s.line(s.saddle.x)), 1e-10);
    EXPECT_LT(s.agreement.max(), 1e-8);
}

TEST(Separatrix, ThetaHalfLinePassesThroughSaddle)
{
    const Separatrix s = separatrix_linear(ModelParams::reduced(4.0, 4.0, 2.0, 1.0, 0.5));
    EXPECT_NEAR(s.saddle.x, 0.6, 1e-15);
    EXPECT_NEAR(s.line(0.6), 0.5, 1e-12);
}

TEST(Separatrix, EigenConsistency)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const ModelParams p      = random_bistable(rng);
        const Separatrix s       = separatrix_linear(p);
        const Eigen::Matrix2d& j = s.jacobian;
        const Eigen::Vector2d eta(s.eigvec_neg[0], s.eigvec_neg[1]);
        EXPECT_LE((j * eta - s.lambda_neg * eta).norm(), 1e-9 * eta.norm() * std::fmax(1.0, j.norm()));
        EXPECT_NEAR(s.lambda_pos * s.lambda_neg, j.determinant(), 1e-10 * std::fabs(j.determinant()));
        EXPECT_NEAR(s.lambda_pos + s.lambda_neg, j.trace(),
                    1e-10 * std::fmax(std::fabs(j.trace()), s.lambda_pos - s.lambda_neg));
        EXPECT_LT(std::fabs(s.saddle.n - s.line(s.saddle.x)), 1e-10);
    }
}

TEST(Separatrix, ClosedFormsAgreeOverRandomDraws)
{
    std::mt19937_64 rng(100);
    for (int trial = 0; trial < 100; ++trial) {
        const ModelParams p = random_bistable(rng);
        const Separatrix s  = separatrix_linear(p);
        EXPECT_LT(s.agreement.lambda_neg, 1e-8);
        EXPECT_LT(s.agreement.lambda_pos, 1e-8);
        EXPECT_LT(s.agreement.eta1, 1e-8);
        EXPECT_LT(s.agreement.slope, 1e-8);
        EXPECT_LT(s.agreement.intercept, 1e-8);
    }
}

TEST(Separatrix, NoSaddleOutsideBistableWindow)
{
    EXPECT_THROW(separatrix_linear(ModelParams::reduced(0.5, 10.0, 3.0, 1.0, 1.0)), NoSaddleError);
    EXPECT_THROW(separatrix_linear(ModelParams::reduced(10.0, 10.0, 3.0, 1.0, 1.0)), NoSaddleError);
}

TEST(AreaBelowLine, ExactPieces)
{
    EXPECT_DOUBLE_EQ(area_below_line(0.0, 0.3), 0.3);
    EXPECT_DOUBLE_EQ(area_below_line(0.0, 1.7), 1.0);
    EXPECT_DOUBLE_EQ(area_below_line(0.0, -0.2), 0.0);
    EXPECT_DOUBLE_EQ(area_below_line(1.0, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(area_below_line(4.0, -1.0), 0.625);
    EXPECT_DOUBLE_EQ(area_below_line(-2.0, 1.5), 0.5);
    EXPECT_DOUBLE_EQ(area_below_line(0.5, 0.25), 0.5);
}

TEST(AreaBelowLine, LinearAreasReproduceCaptionValues)
{
    struct Case {
        ModelParams p;
        double area;
    };
    const Case cases[] = {
        {ModelParams::reduced(4.0, 4.0, 2.0, 1.0, 0.05), 0.9489},
        {ModelParams::reduced(4.0, 4.0, 2.0, 1.0, 0.5), 0.4608},
        {ModelParams::reduced(4.0, 4.0, 2.0, 1.0, 0.8), 0.1655},
        {ModelParams::reduced(3.6, 10.0, 5.0, 1.0, 0.1), 0.7891},
        {ModelParams::reduced(3.6, 10.0, 5.0, 3.0, 0.1), 0.5795},
        {ModelParams::reduced(3.6, 10.0, 5.0, 4.0, 0.1), 0.1644},
        {ModelParams::reduced(3.6, 3.5, 2.0, 1.0, 0.5), 0.0586},
        {ModelParams::reduced(4.0, 3.5, 2.0, 1.0, 0.5), 0.2743},
        {ModelParams::reduced(5.5, 3.5, 2.0, 1.0, 0.5), 0.8885},
    };
    for (const auto& c : cases) {
        const Separatrix s = separatrix_linear(c.p);
        EXPECT_NEAR(area_below_line(s.slope, s.intercept), c.area, 1e-4) << "r0=" << c.p.r0;
    }
}

TEST(BasinGrid, AreasPartitionTheSquare)
{
    const BasinReport r = basin_area_grid(two_basin(), 30, basin_cfg());
    ASSERT_EQ(r.labels.size(), 900u);
    EXPECT_NEAR(r.area_fp1 + r.area_fp2 + r.area_other + r.area_unresolved, 1.0, 1e-12);
    EXPECT_GT(r.area_fp1, 0.0);
    EXPECT_GT(r.area_fp2, 0.0);
    EXPECT_EQ(r.area_unresolved, 0.0);
    EXPECT_TRUE(r.warnings.empty());
    // High vaccination with low risk ends in fp1; the opposite corner in fp2.
    EXPECT_EQ(r.labels[0 * 30 + 29], BasinLabel::fp1);
    EXPECT_EQ(r.labels[29 * 30 + 0], BasinLabel::fp2);
}

TEST(BasinGrid, IndependentOfThreadCount)
{
    BasinOptions one;
    one.threads = 1;
    BasinOptions many;
    many.threads = 3;
    const ModelParams p = ModelParams::reduced(4.0, 4.0, 2.0, 1.0, 0.5);
    const BasinReport a = basin_area_grid(p, 24, basin_cfg(), one);
    const BasinReport b = basin_area_grid(p, 24, basin_cfg(), many);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.area_fp1, b.area_fp1);
}

TEST(BasinGrid, RefinementChangesAreasByLessThanTwoCells)
{
    const ModelParams p = two_basin();
    const BasinReport a = basin_area_grid(p, 40, basin_cfg());
    const BasinReport b = basin_area_grid(p, 80, basin_cfg());
    EXPECT_LT(std::fabs(a.area_fp1 - b.area_fp1), 2.0 / 40);
    EXPECT_LT(std::fabs(a.area_fp2 - b.area_fp2), 2.0 / 40);
}

TEST(BasinGrid, LinearSeparatrixIsExactNearSaddle)
{
    // Cells of a 201 grid within 0.02 of the saddle, skipping those within
    // one cell width of the line.
    const int g         = 201;
    const ModelParams p = ModelParams::reduced(4.0, 4.0, 2.0, 1.0, 0.5);
    const Separatrix s  = separatrix_linear(p);
    const auto fps      = enumerate_fixed_points(p);
    const std::vector<FixedPoint> cands{fps[0], fps[1]};
    std::vector<StateVec<2>> starts;
    for (int row = 0; row < g; ++row) {
        for (int col = 0; col < g; ++col) {
            const double x = (col + 0.5) / g;
            const double n = (row + 0.5) / g;
            const double off = (n - s.line(x)) / std::sqrt(1.0 + s.slope * s.slope);
            if (std::hypot(x - s.saddle.x, n - s.saddle.n) <= 0.02 && std::fabs(off) > 1.0 / g) {
                starts.push_back({x, n});
            }
        }
    }
    ASSERT_GT(starts.size(), 20u);
    const auto ends = integrate_reduced_endpoints(p, starts, basin_cfg());
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const auto hit = classify_endpoint(ends[k].state[0], ends[k].state[1],
                                           ends[k].terminal_reason, cands, 1e-3);
        ASSERT_TRUE(hit.has_value());
        const bool below = starts[k][1] < s.line(starts[k][0]);
        EXPECT_EQ(*hit, below ? 0u : 1u) << starts[k][0] << "," << starts[k][1];
    }
}

TEST(BasinGrid, RejectsBadInputs)
{
    EXPECT_THROW(basin_area_grid(two_basin(), 1, basin_cfg()), std::invalid_argument);
    EXPECT_THROW(basin_area_grid(ModelParams::reduced(10.0, 10.0, 3.0, 1.0, 1.0), 10, basin_cfg()),
                 std::invalid_argument);
    BasinOptions loose;
    loose.classify_tol = 2.0;
    EXPECT_THROW(basin_area_grid(two_basin(), 4, basin_cfg(), loose), BasinConfigurationError);
}

TEST(BasinGrid, ShortHorizonIsReportedAsUnresolved)
{
    IntegrationConfig c = basin_cfg();
    c.t_max             = 5.0;
    const BasinReport r = basin_area_grid(two_basin(), 10, c);
    EXPECT_GT(r.area_unresolved, 0.5);
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings.front().find("t_max"), std::string::npos);
}

TEST(BasinSweep, KeepsOrderAndRecordsPerValueErrors)
{
    const ModelParams p = ModelParams::reduced(4.0, 4.0, 2.0, 1.0, 0.5);
    // theta = 3 puts R0 = 4 below the saddle window.
    const auto pts = basin_area_sweep(p, SweepParameter::theta, {0.5, 3.0, 0.8}, 16, basin_cfg());
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[0].value, 0.5);
    EXPECT_TRUE(pts[0].area_fp1.has_value());
    EXPECT_FALSE(pts[1].area_fp1.has_value());
    EXPECT_FALSE(pts[1].error.empty());
    EXPECT_TRUE(pts[2].area_fp1.has_value());
    EXPECT_GT(*pts[0].area_fp1, *pts[2].area_fp1);
}

TEST(BasinSweep, ParameterNames)
{
    EXPECT_EQ(parse_sweep_parameter("theta"), SweepParameter::theta);
    EXPECT_EQ(parse_sweep_parameter("cost_vacc_low"), SweepParameter::cost_vacc_low);
    EXPECT_EQ(parse_sweep_parameter("r0"), SweepParameter::r0);
    EXPECT_THROW(parse_sweep_parameter("mu"), std::invalid_argument);
    EXPECT_EQ(with_parameter(two_basin(), SweepParameter::r0, 4.0).r0, 4.0);
    EXPECT_THROW(with_parameter(two_basin(), SweepParameter::cost_vacc_low, 5.0),
                 InvalidParameterError);
}
