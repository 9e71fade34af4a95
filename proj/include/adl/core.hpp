#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace adl {

/// Which friction coordinate a state carries: xi for the normalized
/// dynamics, zeta for the raw (thermal mass nu) dynamics.
enum class FrictionForm { Normalized, Raw };

/// One point (q, p, friction) of the Adaptive Langevin phase space.
/// Unit mass matrix throughout.
struct SamplerState {
    std::vector<double> q;
    std::vector<double> p;
    double friction = 0.0;
    FrictionForm form = FrictionForm::Normalized;

    std::size_t dim() const noexcept { return q.size(); }

    /// Throws DimensionError / ParameterError if q, p disagree in length,
    /// are empty, or hold non-finite entries.
    void validate() const;
};

/// The raw parametrization: thermal mass and the two noise amplitudes.
struct RawParams {
    double nu = 1.0;
    double sigma_a = 0.0;
    double sigma_g = 0.0;
};

/// Parameters of the normalized dynamics (beta, gamma, epsilon) together
/// with the raw record when the run was specified in raw form.
///
/// Aggregate on purpose: kernels take it as-is. Use the factories when the
/// values come from user input; they enforce beta, gamma, epsilon > 0.
struct DynamicsParams {
    double beta = 1.0;
    double gamma = 1.0;
    double epsilon = 1.0;
    std::size_t n = 1;
    std::optional<RawParams> raw;

    static DynamicsParams normalized(double beta, double gamma, double epsilon, std::size_t n = 1);

    /// Thermal mass nu = epsilon^2.
    double nu() const noexcept { return epsilon * epsilon; }

    void validate() const;
};

/// Builds normalized parameters from (beta, nu, sigma_A, sigma_G):
/// epsilon = sqrt(nu), gamma = beta (sigma_A^2 + sigma_G^2) / 2.
DynamicsParams normalize_params(double beta, double nu, double sigma_a, double sigma_g,
                                std::size_t n = 1);

/// xi = epsilon (zeta - gamma)  <->  zeta = gamma + xi / epsilon.
/// Converting to Raw requires params.raw.
SamplerState friction_convert(const SamplerState& state, const DynamicsParams& params,
                              FrictionForm target);

} // namespace adl
