#include "vaxdyn/model.hpp"

#include "vaxdyn/errors.hpp"

#include <cmath>
#include <string>

namespace vaxdyn {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw InvalidParameterError(what);
    }
}

double cost_at(double n, const ModelParams& p)
{
    return n * p.cost_vacc_high + (1.0 - n) * p.cost_vacc_low;
}

} // namespace

ModelParams ModelParams::full(double mu, double beta_t, double gamma, double cost_infection,
                              double cost_vacc_high, double cost_vacc_low, double theta,
                              double eps1, double eps2, double sel_strength)
{
    ModelParams p;
    p.mu             = mu;
    p.beta_t         = beta_t;
    p.gamma          = gamma;
    p.cost_infection = cost_infection;
    p.cost_vacc_high = cost_vacc_high;
    p.cost_vacc_low  = cost_vacc_low;
    p.theta          = theta;
    p.eps1           = eps1;
    p.eps2           = eps2;
    p.sel_strength   = sel_strength;
    if (gamma + mu <= 0.0) {
        throw DegenerateParameterError("gamma + mu must be positive to define R0");
    }
    p.r0 = beta_t / (gamma + mu);
    p.validate(ModelKind::full);
    return p;
}

ModelParams ModelParams::reduced(double r0, double cost_infection, double cost_vacc_high,
                                 double cost_vacc_low, double theta, double eps1, double eps2)
{
    ModelParams p;
    p.r0             = r0;
    p.cost_infection = cost_infection;
    p.cost_vacc_high = cost_vacc_high;
    p.cost_vacc_low  = cost_vacc_low;
    p.theta          = theta;
    p.eps1           = eps1;
    p.eps2           = eps2;
    p.validate(ModelKind::reduced);
    return p;
}

void ModelParams::validate(ModelKind kind) const
{
    require(std::isfinite(mu) && std::isfinite(beta_t) && std::isfinite(gamma) &&
                std::isfinite(r0) && std::isfinite(cost_infection) &&
                std::isfinite(cost_vacc_high) && std::isfinite(cost_vacc_low) &&
                std::isfinite(theta) && std::isfinite(eps1) && std::isfinite(eps2) &&
                std::isfinite(sel_strength),
            "all parameters must be finite");
    require(cost_vacc_low > 0.0, "cost_vacc_low must be > 0");
    require(cost_vacc_high > cost_vacc_low, "cost_vacc_high must exceed cost_vacc_low");
    require(cost_infection > cost_vacc_high, "cost_infection must exceed cost_vacc_high");
    require(theta > 0.0, "theta must be > 0");
    require(mu >= 0.0 && gamma >= 0.0 && beta_t >= 0.0, "mu, gamma, beta_t must be >= 0");
    require(eps1 > 0.0 && eps1 <= 1.0, "eps1 must lie in (0, 1]");
    require(eps2 > 0.0 && eps2 <= 1.0, "eps2 must lie in (0, 1]");
    require(sel_strength >= 0.0, "sel_strength must be >= 0");
    require(r0 > 0.0, "r0 must be > 0");
    if (kind == ModelKind::full) {
        require(mu > 0.0, "full model requires mu > 0");
        require(gamma + mu > 0.0, "full model requires gamma + mu > 0");
        const double derived = beta_t / (gamma + mu);
        require(std::fabs(r0 - derived) <= 1e-12 * std::fmax(1.0, std::fabs(derived)),
                "r0 inconsistent with beta_t / (gamma + mu)");
    }
}

FullState epidemic_initial_state(double x0, double n0, double i0)
{
    if (!(x0 >= 0.0 && x0 <= 1.0 && n0 >= 0.0 && n0 <= 1.0 && i0 >= 0.0 && i0 + x0 <= 1.0)) {
        throw DomainError("initial state requires x0, n0 in [0,1] and i0 + x0 <= 1");
    }
    return {1.0 - i0 - x0, i0, 0.0, x0, n0};
}

double perceived_cost(double n, const ModelParams& p)
{
    if (!(n >= 0.0 && n <= 1.0)) {
        throw DomainError("perceived risk n must lie in [0,1], got " + std::to_string(n));
    }
    return cost_at(n, p);
}

double infection_prob_dynamic(double i, const ModelParams& p)
{
    const double denom = p.beta_t * i + p.mu;
    if (denom == 0.0) {
        throw DegenerateParameterError("beta_t * I + mu vanishes");
    }
    return p.beta_t * i / denom;
}

double infection_prob_equilibrium(double x, const ModelParams& p)
{
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("vaccinated fraction x must lie in [0,1]");
    }
    if (!(p.r0 > 0.0)) {
        throw DomainError("r0 must be positive");
    }
    if (x < 1.0 - 1.0 / p.r0) {
        return 1.0 - 1.0 / (p.r0 * (1.0 - x));
    }
    return 0.0;
}

double fermi_vacc_rate(const ReducedState& st, double f, const ModelParams& p)
{
    const double half = 0.5 * p.sel_strength;
    const double v    = cost_at(st.n, p);
    const double gain = (1.0 - f) * std::tanh(half * (-v)) +
                        f * std::tanh(half * (-v + p.cost_infection));
    return st.x * (1.0 - st.x) * gain;
}

ReducedState reduced_rhs(const ReducedState& st, const ModelParams& p)
{
    ReducedState d;
    detail::reduced_field(st.x, st.n, p.r0, p.cost_infection, p.cost_vacc_high, p.cost_vacc_low,
                          p.theta, d.x, d.n);
    return d;
}

ReducedState slow_reduced_rhs(const ReducedState& st, const ModelParams& p)
{
    const ReducedState d = reduced_rhs(st, p);
    return {p.eps1 * d.x, p.eps2 * d.n};
}

FullState full_rhs(const FullState& st, const ModelParams& p)
{
    const double infection = p.beta_t * st.s * st.i;
    // f(x,t) inline: mu > 0 is a full-model invariant, so the denominator is positive.
    const double f = p.beta_t * st.i / (p.beta_t * st.i + p.mu);
    const double v = cost_at(st.n, p);

    FullState d;
    d.s = p.mu * (1.0 - st.x) - infection - p.mu * st.s;
    d.i = infection - p.gamma * st.i - p.mu * st.i;
    d.r = p.mu * st.x + p.gamma * st.i - p.mu * st.r;
    d.x = p.eps1 * (st.x * (1.0 - st.x)) * (f * p.cost_infection - v);
    d.n = p.eps2 * (st.n * (1.0 - st.n)) * (-st.x + (1.0 + p.theta) * (1.0 - st.x));
    return d;
}

} // namespace vaxdyn
