#pragma once

#include <array>
#include <cstddef>

namespace vaxdyn {

template <std::size_t N>
using StateVec = std::array<double, N>;

enum class ModelKind { full, reduced };

/**
 * Rate constants, costs and time-scale factors of the coupled
 * epidemic / vaccination / perceived-risk system.
 *
 * `beta_t` is the SIR transmission rate and `sel_strength` the Fermi
 * selection intensity; the two are never interchangeable.
 *
 * Use the `full()` / `reduced()` factories, which enforce the invariants.
 */
struct ModelParams {
    double mu             = 0.0;
    double beta_t         = 0.0;
    double gamma          = 0.0;
    double r0             = 0.0;
    double cost_infection = 0.0; // C
    double cost_vacc_high = 0.0; // V_H
    double cost_vacc_low  = 0.0; // V_L
    double theta          = 0.0;
    double eps1           = 1.0;
    double eps2           = 1.0;
    double sel_strength   = 0.0;

    /// Full five-dimensional model. r0 is derived as beta_t / (gamma + mu).
    static ModelParams full(double mu, double beta_t, double gamma, double cost_infection,
                            double cost_vacc_high, double cost_vacc_low, double theta, double eps1,
                            double eps2, double sel_strength = 0.0);

    /// Reduced (x, n) model, parameterized directly by R0.
    static ModelParams reduced(double r0, double cost_infection, double cost_vacc_high,
                               double cost_vacc_low, double theta, double eps1 = 1.0,
                               double eps2 = 1.0);

    /// Throws InvalidParameterError on any invariant violation for `kind`.
    void validate(ModelKind kind) const;
};

struct FullState {
    double s = 0.0;
    double i = 0.0;
    double r = 0.0;
    double x = 0.0;
    double n = 0.0;

    StateVec<5> as_array() const { return {s, i, r, x, n}; }
    static FullState from_array(const StateVec<5>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }
    double total() const { return s + i + r; }
};

struct ReducedState {
    double x = 0.0;
    double n = 0.0;

    StateVec<2> as_array() const { return {x, n}; }
    static ReducedState from_array(const StateVec<2>& a) { return {a[0], a[1]}; }
};

/// Initial condition used throughout the time-scale experiments:
/// I = i0, R = 0, S = 1 - i0 - x0.
FullState epidemic_initial_state(double x0, double n0, double i0 = 0.1);

// ---- vector-field pieces -------------------------------------------------

/// V(n) = n V_H + (1-n) V_L. Throws DomainError for n outside [0,1].
double perceived_cost(double n, const ModelParams& p);

/// f(x,t) = beta_t I / (beta_t I + mu).
double infection_prob_dynamic(double i, const ModelParams& p);

/// Equilibrium infection probability of the unvaccinated, piecewise in x.
double infection_prob_equilibrium(double x, const ModelParams& p);

/// Vaccination rate under the Fermi imitation rule at finite selection strength.
double fermi_vacc_rate(const ReducedState& st, double f, const ModelParams& p);

ReducedState reduced_rhs(const ReducedState& st, const ModelParams& p);

/// Reduced field with the time-scale factors applied: (eps1 dx, eps2 dn).
ReducedState slow_reduced_rhs(const ReducedState& st, const ModelParams& p);

FullState full_rhs(const FullState& st, const ModelParams& p);

namespace detail {

// Shared arithmetic of the reduced field. The lane-batched basin kernel and
// reduced_rhs both call this so that their results agree bit for bit.
inline void reduced_field(double x, double n, double r0, double c, double vh, double vl,
                          double theta, double& dx, double& dn)
{
    const double herd = 1.0 - 1.0 / r0;
    const double f_in = 1.0 - 1.0 / (r0 * (1.0 - x));
    const double f    = x < herd ? f_in : 0.0;
    const double v    = n * vh + (1.0 - n) * vl;
    dx                = x * (1.0 - x) * (f * c - v);
    dn                = n * (1.0 - n) * (-x + (1.0 + theta) * (1.0 - x));
}

} // namespace detail

} // namespace vaxdyn
