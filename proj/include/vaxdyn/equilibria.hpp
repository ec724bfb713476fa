#pragma once

#include "vaxdyn/fixed_point.hpp"
#include "vaxdyn/model.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace vaxdyn {

/// The R0 thresholds that delimit the stability regimes.
struct RegimeThresholds {
    double fp1_exists; ///< C / (C - V_L)
    double fp2_exists; ///< C / (C - V_H)
    double saddle_lo;  ///< (2 + theta) C / (C - V_L)
    double saddle_hi;  ///< (2 + theta) C / (C - V_H)
};

RegimeThresholds regime_thresholds(const ModelParams& p);

struct RegimeReport {
    int case_id = 0; ///< 1 when saddle_lo > fp2_exists, else 2
    int subcase = 0; ///< 1..5, by the interval R0 falls into
    std::vector<int> stable_points;
    bool bistable = false;
    RegimeThresholds thresholds{};
};

/// All seven fixed points in id order. Existence follows the closed-form
/// conditions; Jacobian, eigenvalues and classification are filled for the
/// existing ones. Throws DegenerateParameterError if V_H == V_L.
std::vector<FixedPoint> enumerate_fixed_points(const ModelParams& p);

/// Analytic Jacobian of the reduced field; the branch follows x < 1 - 1/R0.
Eigen::Matrix2d jacobian_reduced(const ReducedState& point, const ModelParams& p);

std::array<std::complex<double>, 2> eigenvalues_2x2(const Eigen::Matrix2d& j);

/// Classification by eigenvalue real parts. Real parts within
/// 1e-12 * max(1, |J|) of zero count as zero (nonhyperbolic).
Stability classify_eigenvalues(const std::array<std::complex<double>, 2>& ev,
                               const Eigen::Matrix2d& j);

/// Throws std::invalid_argument if `fp` does not exist.
Stability classify_fixed_point(const FixedPoint& fp);

/// Case / subcase selection from the ordering of the R0 thresholds.
/// Throws BoundaryRegimeError when R0 (or the case discriminant) coincides
/// with a threshold to relative precision 1e-12.
RegimeReport classify_regime(const ModelParams& p);

/// Ids of existing fixed points classified stable by their eigenvalues.
std::vector<int> eigen_stable_ids(const std::vector<FixedPoint>& fps);

} // namespace vaxdyn
