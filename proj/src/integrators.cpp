#include "adl/integrators.hpp"

#include <fmt/format.h>

#include <cmath>

namespace adl {

OuCoefficients ou_coefficients(double zeta, double sigma, double dt) noexcept
{
    const double x = 2.0 * dt * zeta;
    const double alpha = std::exp(-dt * zeta);
    double var_over_dt;
    if (std::abs(x) < 1e-4) {
        // (1 - e^{-x}) / x = 1 - x/2 + x^2/6 - ...
        var_over_dt = 1.0 - x / 2.0 + x * x / 6.0;
    } else {
        var_over_dt = -std::expm1(-x) / x;
    }
    return {alpha, sigma * std::sqrt(dt * var_over_dt)};
}

void StepConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ParameterError(fmt::format("step size must be positive and finite (got {})", dt));
    if (thinning == 0)
        throw ParameterError("thinning must be at least 1");
}

void SamplerSpec::validate() const
{
    const std::size_t n = dimension(model);
    if (scheme == Scheme::Badodab) {
        params.validate();
    } else {
        if (!params.raw)
            throw ParameterError("ODABADO needs the raw parameter record (nu, sigma_A)");
        if (!(params.beta > 0.0) || !(params.raw->nu > 0.0) || !(params.raw->sigma_a >= 0.0))
            throw ParameterError("ODABADO needs beta > 0, nu > 0 and sigma_A >= 0");
    }
    if (params.n != n)
        throw DimensionError(fmt::format("parameters are for dimension {}, model has {}", params.n, n));
    if (minibatch > 0) {
        if (scheme != Scheme::Odabado || !std::holds_alternative<BlrPosterior>(model))
            throw ParameterError("minibatch gradients need ODABADO on a logistic-regression posterior");
    }
}

namespace {

void check_state(const SamplerState& state, std::size_t n, FrictionForm form)
{
    state.validate();
    if (state.dim() != n)
        throw DimensionError(fmt::format("state has dimension {}, model has {}", state.dim(), n));
    if (state.form != form)
        throw ParameterError("state friction form does not match the integrator");
}

} // namespace

SamplerState badodab_step(const SamplerState& state, const DynamicsParams& params,
                          const PotentialModel& model, double dt, RngStream& rng)
{
    check_state(state, dimension(model), FrictionForm::Normalized);
    SamplerState next = state;
    SamplerSpec spec{Scheme::Badodab, model, params, 0};
    with_stepper(spec, dt, [&](auto& stepper) { stepper.step(next, rng); });
    return next;
}

SamplerState odabado_step(const SamplerState& state, double beta, const RawParams& raw,
                          const PotentialModel& model, std::size_t minibatch, double dt,
                          RngStream& rng)
{
    check_state(state, dimension(model), FrictionForm::Raw);
    SamplerState next = state;
    DynamicsParams params{beta, 0.0, std::sqrt(raw.nu), dimension(model), raw};
    SamplerSpec spec{Scheme::Odabado, model, params, minibatch};
    if (minibatch > 0 && !std::holds_alternative<BlrPosterior>(model))
        throw ParameterError("minibatch gradients need a logistic-regression posterior");
    with_stepper(spec, dt, [&](auto& stepper) { stepper.step(next, rng); });
    return next;
}

ObservableSeries simulate(const SamplerState& init, const SamplerSpec& spec, const StepConfig& config,
                          const std::vector<Observable>& observables, RngStream& rng)
{
    spec.validate();
    check_state(init, dimension(spec.model), spec.form());
    return with_stepper(spec, config.dt, [&](auto& stepper) {
        return simulate(init, stepper, config, observables, rng);
    });
}

} // namespace adl
