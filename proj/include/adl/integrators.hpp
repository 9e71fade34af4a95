#pragma once

#include "adl/core.hpp"
#include "adl/error.hpp"
#include "adl/observables.hpp"
#include "adl/potentials.hpp"
#include "adl/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace adl {

/// Exact OU sub-flow dp = -zeta p dt + sigma dW over time dt:
/// p <- alpha p + G R, R ~ N(0, I).
struct OuCoefficients {
    double alpha;
    double noise; // G
};

/// alpha = e^{-dt zeta}, G = sigma sqrt((1 - e^{-2 dt zeta}) / (2 zeta)),
/// G = sigma sqrt(dt) at zeta = 0. Any real zeta is admissible.
OuCoefficients ou_coefficients(double zeta, double sigma, double dt) noexcept;

/// Step size, number of steps and recording stride.
struct StepConfig {
    double dt = 2e-3;
    std::size_t steps = 0;
    std::size_t thinning = 1;

    void validate() const;
};

/// True when dt exceeds epsilon / 10, where the thermostat coupling starts
/// to become stiff relative to the step.
inline bool thermostat_is_stiff(double dt, double epsilon) noexcept { return dt > epsilon / 10.0; }

/// Anything that hands out standard normals and uniform indices.
template <class N>
concept NoiseSource = requires(N& noise, std::size_t n) {
    { noise.normal() } -> std::convertible_to<double>;
    { noise.uniform_index(n) } -> std::convertible_to<std::size_t>;
};

/// Deterministic stand-in that returns zero for every normal draw.
struct ZeroNoise {
    double normal() noexcept { return 0.0; }
    std::size_t uniform_index(std::size_t) noexcept { return 0; }
};

namespace detail {

constexpr double kDivergenceBound = 1e100;

inline bool state_is_sane(const SamplerState& s) noexcept
{
    auto ok = [](double x) { return std::isfinite(x) && std::abs(x) <= kDivergenceBound; };
    for (std::size_t i = 0; i < s.q.size(); ++i)
        if (!ok(s.q[i]) || !ok(s.p[i]))
            return false;
    return ok(s.friction);
}

inline double kinetic_excess(std::span<const double> p, double beta) noexcept
{
    double p2 = 0.0;
    for (double x : p)
        p2 += x * x;
    return p2 - static_cast<double>(p.size()) / beta;
}

template <NoiseSource Noise>
void ou_update(std::span<double> p, const OuCoefficients& c, Noise& noise)
{
    if (c.noise == 0.0) {
        for (double& x : p)
            x *= c.alpha;
        return;
    }
    for (double& x : p)
        x = c.alpha * x + c.noise * noise.normal();
}

} // namespace detail

/// Exact gradient of a concrete potential type.
template <class Model>
struct ExactGradient {
    const Model* model;

    template <NoiseSource Noise>
    void operator()(std::span<const double> q, std::span<double> grad, Noise&) const
    {
        model->gradient(q, grad);
    }
};

/// Unbiased minibatch estimator of the posterior gradient; indices are
/// resampled with replacement on every call.
struct MinibatchGradient {
    const Dataset* train = nullptr;
    double prior_sigma2 = 100.0;
    std::size_t m = 100;
    std::vector<std::size_t> indices;

    MinibatchGradient(const BlrPosterior& posterior, std::size_t batch)
        : train(posterior.train.get()), prior_sigma2(posterior.prior_sigma2), m(batch), indices(batch)
    {
        if (batch == 0)
            throw ParameterError("minibatch size must be at least 1");
    }

    template <NoiseSource Noise>
    void operator()(std::span<const double> q, std::span<double> grad, Noise& noise)
    {
        for (auto& j : indices)
            j = noise.uniform_index(train->size());
        const double scale = static_cast<double>(train->size()) / static_cast<double>(m);
        blr_gradient_into(*train, prior_sigma2, q, indices, scale, grad);
    }
};

/// BADODAB splitting of the normalized dynamics
///   dq = p dt,
///   dp = (-grad U - (xi/eps) p - gamma p) dt + sqrt(2 gamma / beta) dW,
///   dxi = (|p|^2 - n/beta) / eps dt.
///
/// Stage order: B/2 A/2 D/2 O D/2 A/2 B/2. The force at the end of a step
/// is cached and reused by the next step while q is unchanged.
template <class Model>
class BadodabStepper {
public:
    BadodabStepper(const Model& model, const DynamicsParams& params, double dt)
        : model_(&model), beta_(params.beta), gamma_(params.gamma), epsilon_(params.epsilon),
          dt_(dt), sigma_(std::sqrt(2.0 * params.gamma / params.beta))
    {
    }

    double dt() const noexcept { return dt_; }
    std::size_t steps_taken() const noexcept { return steps_; }

    template <NoiseSource Noise>
    void step(SamplerState& s, Noise& noise)
    {
        const std::size_t n = s.q.size();
        if (grad_.size() != n) {
            grad_.assign(n, 0.0);
            grad_q_.clear();
        }
        last_ = s;
        const double h = dt_;
        const double d_coeff = h / (2.0 * epsilon_);

        if (grad_q_ != s.q) {
            model_->gradient(s.q, grad_);
            grad_q_ = s.q;
        }
        for (std::size_t i = 0; i < n; ++i)
            s.p[i] -= 0.5 * h * grad_[i];
        for (std::size_t i = 0; i < n; ++i)
            s.q[i] += 0.5 * h * s.p[i];
        s.friction += d_coeff * detail::kinetic_excess(s.p, beta_);

        const auto ou = ou_coefficients(gamma_ + s.friction / epsilon_, sigma_, h);
        detail::ou_update(s.p, ou, noise);

        s.friction += d_coeff * detail::kinetic_excess(s.p, beta_);
        for (std::size_t i = 0; i < n; ++i)
            s.q[i] += 0.5 * h * s.p[i];
        model_->gradient(s.q, grad_);
        grad_q_ = s.q;
        for (std::size_t i = 0; i < n; ++i)
            s.p[i] -= 0.5 * h * grad_[i];

        ++steps_;
        if (!detail::state_is_sane(s))
            throw DivergenceError(steps_, last_.q, last_.p, last_.friction);
    }

private:
    const Model* model_;
    double beta_, gamma_, epsilon_, dt_, sigma_;
    std::vector<double> grad_;
    std::vector<double> grad_q_;
    SamplerState last_;
    std::size_t steps_ = 0;
};

/// ODABADO splitting of the raw dynamics with friction zeta, thermal mass
/// nu and applied noise sigma_A; the B stage is a full kick with a
/// (possibly stochastic) gradient. Stage order: O/2 D/2 A/2 B A/2 D/2 O/2.
/// The closing O/2 acts on the kicked momentum.
template <class Gradient>
class OdabadoStepper {
public:
    OdabadoStepper(Gradient gradient, double beta, const RawParams& raw, double dt)
        : gradient_(std::move(gradient)), beta_(beta), nu_(raw.nu), sigma_a_(raw.sigma_a), dt_(dt)
    {
        if (!(beta > 0.0) || !(raw.nu > 0.0) || !(raw.sigma_a >= 0.0))
            throw ParameterError("ODABADO needs beta > 0, nu > 0 and sigma_A >= 0");
    }

    double dt() const noexcept { return dt_; }
    std::size_t steps_taken() const noexcept { return steps_; }

    template <NoiseSource Noise>
    void step(SamplerState& s, Noise& noise)
    {
        const std::size_t n = s.q.size();
        grad_.resize(n);
        last_ = s;
        const double h = dt_;
        const double d_coeff = h / (2.0 * nu_);

        detail::ou_update(s.p, ou_coefficients(s.friction, sigma_a_, 0.5 * h), noise);
        s.friction += d_coeff * detail::kinetic_excess(s.p, beta_);
        for (std::size_t i = 0; i < n; ++i)
            s.q[i] += 0.5 * h * s.p[i];
        gradient_(std::span<const double>(s.q), std::span<double>(grad_), noise);
        for (std::size_t i = 0; i < n; ++i)
            s.p[i] -= h * grad_[i];
        for (std::size_t i = 0; i < n; ++i)
            s.q[i] += 0.5 * h * s.p[i];
        s.friction += d_coeff * detail::kinetic_excess(s.p, beta_);
        detail::ou_update(s.p, ou_coefficients(s.friction, sigma_a_, 0.5 * h), noise);

        ++steps_;
        if (!detail::state_is_sane(s))
            throw DivergenceError(steps_, last_.q, last_.p, last_.friction);
    }

private:
    Gradient gradient_;
    double beta_, nu_, sigma_a_, dt_;
    std::vector<double> grad_;
    SamplerState last_;
    std::size_t steps_ = 0;
};

/// One BADODAB step from a Normalized state with exact gradients.
SamplerState badodab_step(const SamplerState& state, const DynamicsParams& params,
                          const PotentialModel& model, double dt, RngStream& rng);

/// One ODABADO step from a Raw state. `minibatch` = 0 uses the exact
/// gradient; otherwise the model must be a BlrPosterior.
SamplerState odabado_step(const SamplerState& state, double beta, const RawParams& raw,
                          const PotentialModel& model, std::size_t minibatch, double dt,
                          RngStream& rng);

// --- runtime selection of a stepper ---

enum class Scheme { Badodab, Odabado };

/// Everything needed to build a stepper. BADODAB reads beta, gamma,
/// epsilon from `params`; ODABADO reads beta and `params.raw`.
struct SamplerSpec {
    Scheme scheme = Scheme::Badodab;
    PotentialModel model = Harmonic{};
    DynamicsParams params;
    std::size_t minibatch = 0; // ODABADO on a BlrPosterior: 0 = exact gradient

    FrictionForm form() const noexcept
    {
        return scheme == Scheme::Badodab ? FrictionForm::Normalized : FrictionForm::Raw;
    }

    void validate() const;
};

/// Builds the concrete stepper for `spec` and calls fn(stepper).
template <class Fn>
decltype(auto) with_stepper(const SamplerSpec& spec, double dt, Fn&& fn)
{
    return std::visit(
        [&](const auto& model) -> decltype(auto) {
            using M = std::decay_t<decltype(model)>;
            if (spec.scheme == Scheme::Badodab) {
                BadodabStepper<M> stepper(model, spec.params, dt);
                return fn(stepper);
            }
            if (!spec.params.raw)
                throw ParameterError("ODABADO needs the raw parameter record (nu, sigma_A)");
            if constexpr (std::is_same_v<M, BlrPosterior>) {
                if (spec.minibatch > 0) {
                    OdabadoStepper<MinibatchGradient> stepper(MinibatchGradient(model, spec.minibatch),
                                                              spec.params.beta, *spec.params.raw, dt);
                    return fn(stepper);
                }
            }
            OdabadoStepper<ExactGradient<M>> stepper(ExactGradient<M>{&model}, spec.params.beta,
                                                      *spec.params.raw, dt);
            return fn(stepper);
        },
        spec.model);
}

/// Recorded observable values along one trajectory.
struct ObservableSeries {
    std::vector<std::string> names;
    Eigen::MatrixXd values;          // recorded row x observable
    std::vector<std::size_t> steps;  // step index of each row
    std::vector<double> times;       // step * dt
};

/// Runs `steps` steps from `init`, recording at steps 0, t, 2t, ... On
/// divergence the stepper's DivergenceError (with the last finite state)
/// propagates.
template <class Stepper>
    requires requires(Stepper& st, SamplerState& s, RngStream& rng) { st.step(s, rng); }
ObservableSeries simulate(SamplerState init, Stepper& stepper, const StepConfig& config,
                          const std::vector<Observable>& observables, RngStream& rng)
{
    config.validate();
    if (observables.empty())
        throw ParameterError("simulate needs at least one observable");
    for (const auto& o : observables)
        if (o.min_dimension() > init.dim())
            throw DimensionError("observable '" + o.name() + "' references a missing coordinate");

    ObservableSeries out;
    for (const auto& o : observables)
        out.names.push_back(o.name());
    const std::size_t rows = config.steps / config.thinning + 1;
    out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(observables.size()));
    out.steps.reserve(rows);
    out.times.reserve(rows);

    auto record = [&](std::size_t k) {
        const auto r = static_cast<Eigen::Index>(out.steps.size());
        for (std::size_t j = 0; j < observables.size(); ++j)
            out.values(r, static_cast<Eigen::Index>(j)) = observables[j](init);
        out.steps.push_back(k);
        out.times.push_back(static_cast<double>(k) * config.dt);
    };

    record(0);
    for (std::size_t k = 1; k <= config.steps; ++k) {
        stepper.step(init, rng);
        if (k % config.thinning == 0)
            record(k);
    }
    return out;
}

/// Runtime-dispatched simulate.
ObservableSeries simulate(const SamplerState& init, const SamplerSpec& spec, const StepConfig& config,
                          const std::vector<Observable>& observables, RngStream& rng);

} // namespace adl
