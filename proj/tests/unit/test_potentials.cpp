#include <doctest.h>

#include "adl/error.hpp"
#include "adl/potentials.hpp"

#include <cmath>
#include <memory>
#include <vector>

using namespace adl;

namespace {

std::shared_ptr<const Dataset> tiny_dataset()
{
    auto d = std::make_shared<Dataset>();
    d->features.resize(4, 2);
    d->features << 1.0, 0.5, -0.3, 2.0, 0.7, -1.1, -1.5, 0.2;
    d->labels = {1, 0, 1, 0};
    return d;
}

double fd_component(const PotentialModel& m, std::vector<double> q, std::size_t i, double h)
{
    q[i] += h;
    const double up = evaluate(m, q).energy;
    q[i] -= 2 * h;
    const double dn = evaluate(m, q).energy;
    return (up - dn) / (2 * h);
}

} // namespace

TEST_SUITE("potentials")
{
    TEST_CASE("closed-form values")
    {
        const PotentialModel h = Harmonic{2};
        const auto e = evaluate(h, std::vector{1.0, 2.0});
        CHECK(e.energy == doctest::Approx(2.5));
        CHECK(e.grad == std::vector{1.0, 2.0});

        const PotentialModel dw = DoubleWell::make(1.0, 1.0, 0.5);
        auto at0 = evaluate(dw, std::vector{0.0});
        CHECK(at0.energy == doctest::Approx(1.0));
        CHECK(at0.grad[0] == doctest::Approx(0.5));
        auto at1 = evaluate(dw, std::vector{1.0});
        CHECK(at1.energy == doctest::Approx(0.5));
        CHECK(at1.grad[0] == doctest::Approx(0.5));
        auto atm = evaluate(dw, std::vector{-2.0});
        // (4 - 1)^2 - 1 = 8, gradient 4*(-2)*3 + 0.5
        CHECK(atm.energy == doctest::Approx(8.0));
        CHECK(atm.grad[0] == doctest::Approx(-23.5));
    }

    TEST_CASE("domain checks")
    {
        CHECK_THROWS_AS(DoubleWell::make(0.0, 1.0, 0.0), ParameterError);
        CHECK_THROWS_AS(DoubleWell::make(1.0, -1.0, 0.0), ParameterError);
        CHECK_THROWS_AS(evaluate(Harmonic{2}, std::vector{1.0}), DimensionError);
        CHECK_THROWS_AS(BlrPosterior::make(tiny_dataset(), 0.0), ParameterError);
        CHECK(dimension(BlrPosterior::make(tiny_dataset())) == 2);
    }

    TEST_CASE("gradients agree with central differences")
    {
        auto rng = rng_derive(77, 0);
        const std::vector<PotentialModel> models{Harmonic{3}, DoubleWell::make(1.3, 0.7, -0.4, 3),
                                                 BlrPosterior::make(tiny_dataset(), 4.0)};
        for (const auto& m : models) {
            const auto n = dimension(m);
            for (int probe = 0; probe < 100; ++probe) {
                std::vector<double> q(n);
                for (auto& x : q)
                    x = 2.0 * rng.normal();
                const auto e = evaluate(m, q);
                for (std::size_t i = 0; i < n; ++i) {
                    const double fd = fd_component(m, q, i, 1e-5);
                    CHECK(std::abs(fd - e.grad[i]) <= 1e-6 * (1.0 + std::abs(e.grad[i])));
                }
            }
        }
    }

    TEST_CASE("logistic helpers")
    {
        CHECK(sigmoid(0.0) == 0.5);
        CHECK(sigmoid(800.0) == 1.0);
        CHECK(sigmoid(-800.0) >= 0.0);
        CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
        CHECK(softplus(800.0) == doctest::Approx(800.0));
        CHECK(std::isfinite(softplus(-800.0)));
        CHECK(logistic_likelihood(1.2, 1) + logistic_likelihood(1.2, 0) == doctest::Approx(1.0));
    }

    TEST_CASE("blr energy by hand")
    {
        const auto post = BlrPosterior::make(tiny_dataset(), 2.0);
        const std::vector q{0.4, -0.6};
        double u = (0.16 + 0.36) / 4.0;
        const auto& d = *post.train;
        for (std::size_t j = 0; j < d.size(); ++j) {
            const double t = d.features(j, 0) * q[0] + d.features(j, 1) * q[1];
            u -= std::log(d.labels[j] ? 1.0 / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t)));
        }
        CHECK(post.energy(q) == doctest::Approx(u).epsilon(1e-13));
    }

    TEST_CASE("flipping labels and features leaves the posterior unchanged")
    {
        auto d = tiny_dataset();
        auto flipped = std::make_shared<Dataset>(*d);
        flipped->features *= -1.0;
        for (auto& y : flipped->labels)
            y = 1 - y;
        const auto a = BlrPosterior::make(d, 3.0);
        const auto b = BlrPosterior::make(flipped, 3.0);
        const std::vector q{0.9, 1.7};
        CHECK(a.energy(q) == doctest::Approx(b.energy(q)).epsilon(1e-14));
    }

    TEST_CASE("minibatch estimator is unbiased over all index pairs")
    {
        const auto d = tiny_dataset();
        const std::vector q{0.3, -0.8};
        const auto full = blr_full_gradient(*d, 5.0, q).value;
        const std::size_t n = d->size();
        std::vector<double> mean(2, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const std::vector<std::size_t> idx{i, j};
                const auto g = blr_minibatch_gradient(*d, 5.0, q, idx).value;
                mean[0] += g[0];
                mean[1] += g[1];
            }
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(std::abs(mean[k] / double(n * n) - full[k]) <= 1e-12 * (1.0 + std::abs(full[k])));

        const std::vector<std::size_t> bad{0, 4};
        CHECK_THROWS_AS(blr_minibatch_gradient(*d, 5.0, q, bad), IndexError);
    }

    TEST_CASE("minibatch variance scales as 1/m")
    {
        auto rng = rng_derive(3, 3);
        const std::vector w{1.0, -0.5, 0.25};
        const auto data = make_logistic_dataset(w, 400, rng);
        const std::vector q{0.2, 0.1, -0.3};
        auto var_at = [&](std::size_t m) {
            const int reps = 4000;
            double s = 0.0, s2 = 0.0;
            for (int r = 0; r < reps; ++r) {
                const double g = blr_minibatch_gradient(data, 100.0, q, m, rng).value[0];
                s += g;
                s2 += g * g;
            }
            const double mu = s / reps;
            return s2 / reps - mu * mu;
        };
        const double v4 = var_at(4);
        const double v32 = var_at(32);
        CHECK(v4 / v32 == doctest::Approx(8.0).epsilon(0.12));
    }

    TEST_CASE("posterior mode has zero gradient")
    {
        auto rng = rng_derive(9, 1);
        const std::vector w{1.5, -1.0};
        auto data = std::make_shared<Dataset>(make_logistic_dataset(w, 500, rng));
        const auto post = BlrPosterior::make(data, 100.0);
        const auto mode = blr_map_estimate(post);
        const auto g = blr_full_gradient(*data, 100.0, mode).value;
        CHECK(std::hypot(g[0], g[1]) < 1e-8);
        CHECK(post.energy(mode) < post.energy(w));
    }

    TEST_CASE("synthetic data is reproducible")
    {
        const std::vector w{0.5, 0.5};
        auto r1 = rng_derive(1, 0);
        auto r2 = rng_derive(1, 0);
        const auto a = make_logistic_dataset(w, 50, r1);
        const auto b = make_logistic_dataset(w, 50, r2);
        CHECK(a.features == b.features);
        CHECK(a.labels == b.labels);
        CHECK(mean_likelihood(a, w) > 0.5);
    }
}
