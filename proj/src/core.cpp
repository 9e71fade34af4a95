#include "adl/core.hpp"

#include "adl/error.hpp"

#include <cmath>
#include <fmt/format.h>

namespace adl {

namespace {

bool positive_number(double x) { return x > 0.0 && !std::isnan(x); }

} // namespace

void SamplerState::validate() const
{
    if (q.empty())
        throw DimensionError("state dimension must be at least 1");
    if (q.size() != p.size())
        throw DimensionError(fmt::format("q has length {} but p has length {}", q.size(), p.size()));
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!std::isfinite(q[i]) || !std::isfinite(p[i]))
            throw ParameterError(fmt::format("non-finite state entry at coordinate {}", i));
    }
    if (!std::isfinite(friction))
        throw ParameterError("non-finite friction variable");
}

DynamicsParams DynamicsParams::normalized(double beta, double gamma, double epsilon, std::size_t n)
{
    DynamicsParams p{beta, gamma, epsilon, n, std::nullopt};
    p.validate();
    return p;
}

void DynamicsParams::validate() const
{
    if (!positive_number(beta))
        throw ParameterError(fmt::format("beta must be positive (got {})", beta));
    if (!positive_number(gamma))
        throw ParameterError(fmt::format("gamma must be positive (got {})", gamma));
    if (!positive_number(epsilon))
        throw ParameterError(fmt::format("epsilon must be positive (got {})", epsilon));
    if (n == 0)
        throw ParameterError("dimension n must be at least 1");
    if (raw) {
        const double nu_expected = epsilon * epsilon;
        if (std::abs(raw->nu - nu_expected) > 1e-12 * nu_expected)
            throw ParameterError("raw record inconsistent: nu != epsilon^2");
        const double g = beta * (raw->sigma_a * raw->sigma_a + raw->sigma_g * raw->sigma_g) / 2.0;
        if (std::abs(g - gamma) > 1e-12 * gamma)
            throw ParameterError("raw record inconsistent: gamma != beta (sigma_A^2 + sigma_G^2) / 2");
    }
}

DynamicsParams normalize_params(double beta, double nu, double sigma_a, double sigma_g, std::size_t n)
{
    if (!positive_number(beta))
        throw ParameterError(fmt::format("beta must be positive (got {})", beta));
    if (!positive_number(nu))
        throw ParameterError(fmt::format("nu must be positive (got {})", nu));
    if (!(sigma_a >= 0.0) || !(sigma_g >= 0.0))
        throw ParameterError("noise amplitudes must be nonnegative");
    const double total = sigma_a * sigma_a + sigma_g * sigma_g;
    if (total == 0.0)
        throw DegenerateNoiseError("sigma_A = sigma_G = 0 gives gamma = 0, which is not admitted");

    DynamicsParams p;
    p.beta = beta;
    p.gamma = beta * total / 2.0;
    p.epsilon = std::sqrt(nu);
    p.n = n;
    p.raw = RawParams{nu, sigma_a, sigma_g};
    return p;
}

SamplerState friction_convert(const SamplerState& state, const DynamicsParams& params,
                              FrictionForm target)
{
    SamplerState out = state;
    if (state.form == target)
        return out;
    if (target == FrictionForm::Raw) {
        if (!params.raw)
            throw ConversionError("conversion to raw form needs the raw parameter record");
        out.friction = params.gamma + state.friction / params.epsilon;
    } else {
        out.friction = params.epsilon * (state.friction - params.gamma);
    }
    out.form = target;
    return out;
}

} // namespace adl
