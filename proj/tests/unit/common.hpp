#pragma once

#include "vaxdyn/model.hpp"

#include <random>

namespace vaxdyn::testing {

// Parameters of the two-basin example used throughout the tests.
inline ModelParams two_basin()
{
    return ModelParams::reduced(3.5, 10.0, 3.0, 1.0, 1.0);
}

inline ModelParams scare_full(double eps)
{
    return ModelParams::full(1.0, 16.0, 3.0, 10.0, 3.0, 1.0, 1.0, eps, eps);
}

/// A reduced parameter set satisfying C > V_H > V_L > 0 and theta > 0.
inline ModelParams random_reduced(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double c  = 1.0 + 19.0 * u(rng);
    const double vl = 0.05 * c + 0.6 * c * u(rng);
    const double vh = vl + (c - vl) * (0.05 + 0.9 * u(rng));
    const double th = 0.02 + 3.0 * u(rng);
    const double r0 = 0.3 + 14.7 * u(rng);
    return ModelParams::reduced(r0, c, vh, vl, th);
}

} // namespace vaxdyn::testing
