#pragma once

#include "adl/dataset.hpp"
#include "adl/rng.hpp"

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace adl {

/// U(q) = |q|^2 / 2.
struct Harmonic {
    std::size_t n = 1;

    std::size_t dim() const noexcept { return n; }
    double energy(std::span<const double> q) const noexcept;
    void gradient(std::span<const double> q, std::span<double> grad) const noexcept
    {
        for (std::size_t i = 0; i < q.size(); ++i)
            grad[i] = q[i];
    }
};

/// Skewed double well applied coordinate-wise:
/// U(q) = sum_i (b/a) (q_i^2 - a)^2 + c q_i.
struct DoubleWell {
    double a = 1.0;
    double b = 1.0;
    double c = 0.5;
    std::size_t n = 1;

    /// Rejects a <= 0 or b <= 0 (non-confining).
    static DoubleWell make(double a, double b, double c, std::size_t n = 1);

    std::size_t dim() const noexcept { return n; }
    double energy(std::span<const double> q) const noexcept;
    void gradient(std::span<const double> q, std::span<double> grad) const noexcept
    {
        const double k = 4.0 * b / a;
        for (std::size_t i = 0; i < q.size(); ++i)
            grad[i] = k * q[i] * (q[i] * q[i] - a) + c;
    }
};

/// Negative log posterior of Bayesian logistic regression with an
/// isotropic Gaussian prior of variance prior_sigma2.
struct BlrPosterior {
    std::shared_ptr<const Dataset> train;
    double prior_sigma2 = 100.0;

    static BlrPosterior make(std::shared_ptr<const Dataset> train, double prior_sigma2 = 100.0);

    std::size_t dim() const noexcept { return train->dim(); }
    double energy(std::span<const double> q) const;
    void gradient(std::span<const double> q, std::span<double> grad) const;
};

using PotentialModel = std::variant<Harmonic, DoubleWell, BlrPosterior>;

std::size_t dimension(const PotentialModel& model);

struct Evaluation {
    double energy = 0.0;
    std::vector<double> grad;
};

/// Energy and exact gradient. Throws DimensionError on a length mismatch.
Evaluation evaluate(const PotentialModel& model, std::span<const double> q);

// --- logistic regression pieces ---

/// 1 / (1 + e^{-t}) without overflow for any finite t.
inline double sigmoid(double t) noexcept
{
    if (t >= 0.0)
        return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

/// log(1 + e^t) without overflow.
inline double softplus(double t) noexcept
{
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

/// Likelihood p(y | x, q) = e^{y t} / (1 + e^t) with t = x^T q.
inline double logistic_likelihood(double t, std::uint8_t y) noexcept
{
    return y ? sigmoid(t) : sigmoid(-t);
}

struct GradientEstimate {
    std::vector<double> value;
    std::vector<std::size_t> minibatch_indices; // empty for the exact gradient
};

/// q / sigma^2 + sum_j (s(x_j^T q) - y_j) x_j.
GradientEstimate blr_full_gradient(const Dataset& train, double prior_sigma2,
                                   std::span<const double> q);

/// Same estimator with an explicit index multiset B (|B| = m):
/// q / sigma^2 + (N / m) sum_{j in B} (s(x_j^T q) - y_j) x_j.
GradientEstimate blr_minibatch_gradient(const Dataset& train, double prior_sigma2,
                                        std::span<const double> q,
                                        std::span<const std::size_t> indices);

/// Draws m indices uniformly with replacement from the stream.
GradientEstimate blr_minibatch_gradient(const Dataset& train, double prior_sigma2,
                                        std::span<const double> q, std::size_t m, RngStream& rng);

/// Allocation-free kernel behind both estimators.
void blr_gradient_into(const Dataset& train, double prior_sigma2, std::span<const double> q,
                       std::span<const std::size_t> indices, double scale, std::span<double> out);

/// Posterior mode by Newton's method on the (strictly convex) negative log
/// posterior. Throws ConvergenceError if the gradient norm does not drop
/// below `tol` within `max_iter` iterations.
std::vector<double> blr_map_estimate(const BlrPosterior& posterior, double tol = 1e-10, int max_iter = 100);

/// Synthetic logistic data: features x ~ N(0, I), labels
/// y ~ Bernoulli(s(x^T w)). Draw order per row: d normals, one uniform.
Dataset make_logistic_dataset(std::span<const double> weights, std::size_t rows, RngStream& rng,
                              Split split = Split::Train);

/// Mean likelihood of the labelled rows of `data` at q.
double mean_likelihood(const Dataset& data, std::span<const double> q);

} // namespace adl
