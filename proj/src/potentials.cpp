#include "adl/potentials.hpp"

#include "adl/error.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

namespace adl {

double Harmonic::energy(std::span<const double> q) const noexcept
{
    double u = 0.0;
    for (double x : q)
        u += 0.5 * x * x;
    return u;
}

DoubleWell DoubleWell::make(double a, double b, double c, std::size_t n)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw ParameterError(fmt::format("double well needs a > 0 and b > 0 (got a={}, b={})", a, b));
    if (!std::isfinite(c))
        throw ParameterError("double well tilt c must be finite");
    if (n == 0)
        throw ParameterError("dimension must be at least 1");
    return DoubleWell{a, b, c, n};
}

double DoubleWell::energy(std::span<const double> q) const noexcept
{
    double u = 0.0;
    for (double x : q) {
        const double w = x * x - a;
        u += (b / a) * w * w + c * x;
    }
    return u;
}

BlrPosterior BlrPosterior::make(std::shared_ptr<const Dataset> train, double prior_sigma2)
{
    if (!train)
        throw DataError("posterior needs a training set");
    train->validate();
    if (!(prior_sigma2 > 0.0))
        throw ParameterError("prior variance must be positive");
    return BlrPosterior{std::move(train), prior_sigma2};
}

double BlrPosterior::energy(std::span<const double> q) const
{
    const Eigen::Map<const Eigen::VectorXd> qv(q.data(), static_cast<Eigen::Index>(q.size()));
    const Eigen::VectorXd t = train->features * qv;
    double u = qv.squaredNorm() / (2.0 * prior_sigma2);
    for (std::size_t j = 0; j < train->size(); ++j) {
        const double tj = t(static_cast<Eigen::Index>(j));
        u += softplus(tj) - (train->labels[j] ? tj : 0.0);
    }
    return u;
}

void BlrPosterior::gradient(std::span<const double> q, std::span<double> grad) const
{
    blr_gradient_into(*train, prior_sigma2, q, {}, 1.0, grad);
}

std::size_t dimension(const PotentialModel& model)
{
    return std::visit([](const auto& m) { return m.dim(); }, model);
}

Evaluation evaluate(const PotentialModel& model, std::span<const double> q)
{
    const std::size_t n = dimension(model);
    if (q.size() != n)
        throw DimensionError(fmt::format("q has length {}, model dimension is {}", q.size(), n));
    Evaluation out;
    out.grad.resize(n);
    std::visit(
        [&](const auto& m) {
            out.energy = m.energy(q);
            m.gradient(q, out.grad);
        },
        model);
    return out;
}

void blr_gradient_into(const Dataset& train, double prior_sigma2, std::span<const double> q,
                       std::span<const std::size_t> indices, double scale, std::span<double> out)
{
    const auto d = static_cast<Eigen::Index>(train.dim());
    const Eigen::Map<const Eigen::VectorXd> qv(q.data(), d);
    Eigen::Map<Eigen::VectorXd> g(out.data(), d);
    g = qv / prior_sigma2;

    auto add_row = [&](std::size_t j) {
        const auto row = train.features.row(static_cast<Eigen::Index>(j));
        const double t = row.dot(qv);
        const double r = sigmoid(t) - static_cast<double>(train.labels[j]);
        g.noalias() += (scale * r) * row.transpose();
    };
    if (indices.empty()) {
        for (std::size_t j = 0; j < train.size(); ++j)
            add_row(j);
    } else {
        for (std::size_t j : indices)
            add_row(j);
    }
}

GradientEstimate blr_full_gradient(const Dataset& train, double prior_sigma2, std::span<const double> q)
{
    if (q.size() != train.dim())
        throw DimensionError(fmt::format("q has length {}, data has {} features", q.size(), train.dim()));
    for (double x : q)
        if (!std::isfinite(x))
            throw ParameterError("non-finite parameter vector");
    if (!train.features.allFinite())
        throw DataError("non-finite feature value");
    GradientEstimate est;
    est.value.resize(train.dim());
    blr_gradient_into(train, prior_sigma2, q, {}, 1.0, est.value);
    return est;
}

GradientEstimate blr_minibatch_gradient(const Dataset& train, double prior_sigma2,
                                        std::span<const double> q,
                                        std::span<const std::size_t> indices)
{
    if (indices.empty())
        throw ParameterError("minibatch size must be at least 1");
    if (q.size() != train.dim())
        throw DimensionError(fmt::format("q has length {}, data has {} features", q.size(), train.dim()));
    for (std::size_t j : indices)
        if (j >= train.size())
            throw IndexError(fmt::format("minibatch index {} out of range", j));
    GradientEstimate est;
    est.value.resize(train.dim());
    est.minibatch_indices.assign(indices.begin(), indices.end());
    const double scale = static_cast<double>(train.size()) / static_cast<double>(indices.size());
    blr_gradient_into(train, prior_sigma2, q, indices, scale, est.value);
    return est;
}

GradientEstimate blr_minibatch_gradient(const Dataset& train, double prior_sigma2,
                                        std::span<const double> q, std::size_t m, RngStream& rng)
{
    if (m == 0)
        throw ParameterError("minibatch size must be at least 1");
    std::vector<std::size_t> idx(m);
    for (auto& j : idx)
        j = rng.uniform_index(train.size());
    return blr_minibatch_gradient(train, prior_sigma2, q, idx);
}

std::vector<double> blr_map_estimate(const BlrPosterior& posterior, double tol, int max_iter)
{
    const Dataset& data = *posterior.train;
    const auto d = static_cast<Eigen::Index>(data.dim());
    Eigen::VectorXd q = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd g(d);
    for (int it = 0; it < max_iter; ++it) {
        blr_gradient_into(data, posterior.prior_sigma2, std::span<const double>(q.data(), q.size()), {}, 1.0,
                          std::span<double>(g.data(), g.size()));
        if (g.norm() < tol)
            return {q.data(), q.data() + q.size()};
        const Eigen::VectorXd t = data.features * q;
        Eigen::VectorXd w(t.size());
        for (Eigen::Index j = 0; j < t.size(); ++j) {
            const double s = sigmoid(t(j));
            w(j) = s * (1.0 - s);
        }
        Eigen::MatrixXd h = data.features.transpose() * w.asDiagonal() * data.features;
        h.diagonal().array() += 1.0 / posterior.prior_sigma2;
        q -= h.llt().solve(g);
    }
    throw ConvergenceError(fmt::format("Newton iteration for the posterior mode did not converge in {} steps", max_iter));
}

Dataset make_logistic_dataset(std::span<const double> weights, std::size_t rows, RngStream& rng, Split split)
{
    if (weights.empty() || rows == 0)
        throw ParameterError("synthetic data needs at least one row and one feature");
    const auto d = static_cast<Eigen::Index>(weights.size());
    Dataset data;
    data.split = split;
    data.features.resize(static_cast<Eigen::Index>(rows), d);
    data.labels.resize(rows);
    for (std::size_t j = 0; j < rows; ++j) {
        double t = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double x = rng.normal();
            data.features(static_cast<Eigen::Index>(j), i) = x;
            t += x * weights[static_cast<std::size_t>(i)];
        }
        data.labels[j] = rng.uniform() < sigmoid(t) ? 1 : 0;
    }
    return data;
}

double mean_likelihood(const Dataset& data, std::span<const double> q)
{
    const Eigen::Map<const Eigen::VectorXd> qv(q.data(), static_cast<Eigen::Index>(q.size()));
    const Eigen::VectorXd t = data.features * qv;
    double sum = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j)
        sum += logistic_likelihood(t(static_cast<Eigen::Index>(j)), data.labels[j]);
    return sum / static_cast<double>(data.size());
}

} // namespace adl
