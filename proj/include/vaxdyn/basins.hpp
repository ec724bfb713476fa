#pragma once

#include "vaxdyn/equilibria.hpp"
#include "vaxdyn/integrator.hpp"
#include "vaxdyn/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vaxdyn {

/// The printed closed-form saddle quantities, evaluated verbatim.
///
/// The expression with the minus-square-root branch evaluates to the
/// negative eigenvalue and the plus branch to the positive one. `eta1` is the
/// first component of the eigenvector [eta1, 1] belonging to the positive
/// eigenvalue. `slope` and `intercept` describe the line through the saddle
/// along the stable eigendirection.
struct SaddleClosedForms {
    double lambda_minus_branch;
    double lambda_plus_branch;
    double eta1;
    double slope;
    double intercept;
};

SaddleClosedForms saddle_closed_forms(const ModelParams& p);

/// Relative disagreement between the closed forms and the numeric
/// eigendecomposition, per quantity.
struct ClosedFormAgreement {
    double lambda_neg;
    double lambda_pos;
    double eta1;
    double slope;
    double intercept;

    double max() const;
};

/// Linear approximation n = slope * x + intercept of the boundary between
/// the two basins, taken along the stable eigenvector of the interior saddle.
struct Separatrix {
    ReducedState saddle;
    double lambda_pos = 0.0;
    double lambda_neg = 0.0;
    StateVec<2> eigvec_neg{}; ///< normalized so that its n-component is 1
    StateVec<2> eigvec_pos{}; ///< normalized so that its n-component is 1
    double slope     = 0.0;
    double intercept = 0.0;
    Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();
    SaddleClosedForms closed_form{};
    ClosedFormAgreement agreement{};

    double line(double x) const { return slope * x + intercept; }
};

/// Throws NoSaddleError when fp3 does not exist and DegenerateSaddleError for
/// repeated or non-real eigenvalues.
Separatrix separatrix_linear(const ModelParams& p);

/// Area of { (x, n) in [0,1]^2 : n < slope * x + intercept }.
double area_below_line(double slope, double intercept);

enum class BasinLabel : std::uint8_t { fp1, fp2, other, unresolved };

std::string to_string(BasinLabel l);

struct BasinOptions {
    double classify_tol = 1e-3;
    unsigned threads    = 0; ///< 0: std::thread::hardware_concurrency()
};

struct BasinReport {
    int grid_n = 0;
    /// Row-major over n then x: labels[row * grid_n + col] is the cell with
    /// center ((col + 0.5) / grid_n, (row + 0.5) / grid_n).
    std::vector<BasinLabel> labels;
    double area_fp1        = 0.0;
    double area_fp2        = 0.0;
    double area_other      = 0.0;
    double area_unresolved = 0.0;
    double area_fp1_linear = 0.0;
    Separatrix separatrix;
    RegimeReport regime;
    std::vector<FixedPoint> attractors;
    IntegrationConfig integration;
    double classify_tol = 0.0;
    std::vector<std::string> warnings;

    double cell_center(int index) const { return (index + 0.5) / grid_n; }
};

/// Integrates the reduced system from every cell center of a grid_n x grid_n
/// partition of the unit square and labels each cell by the attractor reached.
/// Requires a bistable regime with an interior saddle and grid_n >= 2.
BasinReport basin_area_grid(const ModelParams& p, int grid_n, const IntegrationConfig& cfg,
                            const BasinOptions& opt = {});

enum class SweepParameter { theta, cost_vacc_low, r0 };

SweepParameter parse_sweep_parameter(const std::string& name);
std::string to_string(SweepParameter s);

/// Copy of `p` with the swept parameter replaced (other fields untouched).
ModelParams with_parameter(const ModelParams& p, SweepParameter which, double value);

struct SweepPoint {
    double value = 0.0;
    std::optional<double> area_fp1;
    std::optional<double> area_fp1_linear;
    std::optional<double> area_unresolved;
    std::string error; ///< non-empty when this value failed
};

std::vector<SweepPoint> basin_area_sweep(const ModelParams& p, SweepParameter which,
                                         const std::vector<double>& values, int grid_n,
                                         const IntegrationConfig& cfg,
                                         const BasinOptions& opt = {});

} // namespace vaxdyn
