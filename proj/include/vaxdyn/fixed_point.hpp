#pragma once

#include "vaxdyn/model.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>
#include <optional>
#include <string>

namespace vaxdyn {

enum class Stability { stable, unstable, saddle, nonhyperbolic };

std::string to_string(Stability s);

/// One of the seven equilibria of the reduced system, numbered 1..7:
/// 1 (x1, 0), 2 (x2, 1), 3 interior saddle, 4 (0,0), 5 (0,1), 6 (1,0), 7 (1,1).
struct FixedPoint {
    int id = 0;
    ReducedState location;
    bool exists = false;
    std::string violated_condition; ///< empty when exists
    Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();
    std::array<std::complex<double>, 2> eigenvalues{};
    std::optional<Stability> classification; ///< set only when exists
    std::string note; ///< disagreement with the closed-form taxonomy, if any
};

} // namespace vaxdyn
