#include <doctest.h>

#include "adl/error.hpp"
#include "adl/integrators.hpp"

#include <cmath>
#include <memory>
#include <vector>

using namespace adl;

namespace {

// Replays a fixed list of normals so stage arithmetic can be checked by hand.
struct ScriptedNoise {
    std::vector<double> values;
    std::size_t next = 0;
    double normal() { return values.at(next++); }
    std::size_t uniform_index(std::size_t) { return 0; }
};

double energy_h(const SamplerState& s)
{
    double e = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i)
        e += 0.5 * (s.q[i] * s.q[i] + s.p[i] * s.p[i]);
    return e;
}

// Straight-line BADODAB for U = |q|^2/2, written out stage by stage.
SamplerState badodab_by_hand(SamplerState s, double beta, double gamma, double eps, double h,
                             const std::vector<double>& r)
{
    const auto n = s.dim();
    auto kin = [&] {
        double k = 0.0;
        for (double x : s.p)
            k += x * x;
        return k - double(n) / beta;
    };
    for (std::size_t i = 0; i < n; ++i)
        s.p[i] -= h / 2 * s.q[i];
    for (std::size_t i = 0; i < n; ++i)
        s.q[i] += h / 2 * s.p[i];
    s.friction += h / (2 * eps) * kin();
    const double z = gamma + s.friction / eps;
    const double a = std::exp(-h * z);
    const double g = std::sqrt(2 * gamma / beta * (1 - a * a) / (2 * z));
    for (std::size_t i = 0; i < n; ++i)
        s.p[i] = a * s.p[i] + g * r[i];
    s.friction += h / (2 * eps) * kin();
    for (std::size_t i = 0; i < n; ++i)
        s.q[i] += h / 2 * s.p[i];
    for (std::size_t i = 0; i < n; ++i)
        s.p[i] -= h / 2 * s.q[i];
    return s;
}

std::shared_ptr<const Dataset> small_blr_data()
{
    auto rng = rng_derive(12, 0);
    const std::vector w{1.0, -1.0};
    return std::make_shared<Dataset>(make_logistic_dataset(w, 200, rng));
}

} // namespace

TEST_SUITE("integrators")
{
    TEST_CASE("ou coefficients")
    {
        const auto a = ou_coefficients(1.0, std::sqrt(2.0), 0.5);
        CHECK(a.alpha == doctest::Approx(0.6065306597126334).epsilon(1e-14));
        CHECK(a.noise == doctest::Approx(0.7950600976206502).epsilon(1e-14));
        const auto b = ou_coefficients(-1.0, 1.0, 0.1);
        CHECK(b.alpha == doctest::Approx(1.1051709180756477).epsilon(1e-14));
        CHECK(b.noise == doctest::Approx(0.3327181676435552).epsilon(1e-14));
        const auto c = ou_coefficients(0.0, 2.0, 0.25);
        CHECK(c.alpha == 1.0);
        CHECK(c.noise == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(ou_coefficients(3.0, 1.0, 0.0).noise == 0.0);
    }

    TEST_CASE("ou fluctuation-dissipation identity")
    {
        const double sigma = 1.3;
        for (double z : {-5.0, -1e-3, -1e-7, 1e-12, 1e-9, 1e-6, 1e-4, 0.03, 1.0, 40.0})
            for (double h : {1e-3, 0.1, 0.7}) {
                const auto c = ou_coefficients(z, sigma, h);
                // alpha^2 + 2 z G^2 / sigma^2 = 1, checked through the exact
                // variance (sigma^2/2z)(1 - alpha^2) and its small-z limit
                const double x = 2 * h * z;
                const double v = std::abs(x) > 1e-3 ? sigma * sigma * -std::expm1(-x) / (2 * z)
                                                    : sigma * sigma * h * (1 - x / 2 + x * x / 6 - x * x * x / 24);
                CHECK(c.noise * c.noise == doctest::Approx(v).epsilon(1e-12));
                CHECK(c.alpha == doctest::Approx(std::exp(-h * z)).epsilon(1e-15));
            }
    }

    TEST_CASE("step config and stiffness")
    {
        CHECK_THROWS_AS((StepConfig{0.0, 10, 1}.validate()), ParameterError);
        CHECK_THROWS_AS((StepConfig{0.1, 10, 0}.validate()), ParameterError);
        CHECK(thermostat_is_stiff(0.2, 1.0));
        CHECK_FALSE(thermostat_is_stiff(0.05, 1.0));
    }

    TEST_CASE("hand example from rest")
    {
        const auto params = DynamicsParams::normalized(1.0, 1.0, 1.0);
        Harmonic model{1};
        BadodabStepper<Harmonic> st(model, params, 0.1);
        SamplerState s{{0.0}, {0.0}, 0.0};
        ZeroNoise z;
        st.step(s, z);
        CHECK(s.q[0] == 0.0);
        CHECK(s.p[0] == 0.0);
        CHECK(s.friction == doctest::Approx(-0.1).epsilon(1e-15));
    }

    TEST_CASE("scripted noise matches the stage-by-stage composition")
    {
        const auto params = DynamicsParams::normalized(2.0, 0.7, 0.4, 2);
        Harmonic model{2};
        BadodabStepper<Harmonic> st(model, params, 0.05);
        SamplerState s{{0.3, -1.2}, {0.8, 0.1}, 0.25};
        SamplerState ref = s;
        const std::vector<std::vector<double>> script{{0.5, -1.5}, {2.0, 0.1}, {-0.3, -0.9}};
        ScriptedNoise noise{{0.5, -1.5, 2.0, 0.1, -0.3, -0.9}};
        for (const auto& r : script) {
            st.step(s, noise);
            ref = badodab_by_hand(ref, 2.0, 0.7, 0.4, 0.05, r);
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(s.q[i] == doctest::Approx(ref.q[i]).epsilon(1e-14));
                CHECK(s.p[i] == doctest::Approx(ref.p[i]).epsilon(1e-14));
            }
            CHECK(s.friction == doctest::Approx(ref.friction).epsilon(1e-14));
        }
        CHECK(noise.next == 6);
    }

    TEST_CASE("zero step is the identity")
    {
        const auto params = DynamicsParams::normalized(1.0, 2.0, 0.5);
        auto rng = rng_derive(1, 0);
        const SamplerState s{{0.4}, {-0.7}, 0.3};
        const auto out = badodab_step(s, params, DoubleWell::make(1, 1, 0.5), 0.0, rng);
        CHECK(out.q == s.q);
        CHECK(out.p == s.p);
        CHECK(out.friction == s.friction);
    }

    TEST_CASE("deterministic part is time reversible")
    {
        // gamma = 0 leaves the Nose-Hoover part, reversible under (q, -p, -xi)
        const DynamicsParams params{1.0, 0.0, 0.8, 2, std::nullopt};
        const auto model = DoubleWell::make(1.0, 1.0, 0.3, 2);
        BadodabStepper<DoubleWell> st(model, params, 0.01);
        ZeroNoise z;
        const SamplerState start{{0.2, -0.9}, {1.1, 0.4}, 0.35};
        SamplerState s = start;
        for (int k = 0; k < 500; ++k)
            st.step(s, z);
        for (double& x : s.p)
            x = -x;
        s.friction = -s.friction;
        for (int k = 0; k < 500; ++k)
            st.step(s, z);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(s.q[i] == doctest::Approx(start.q[i]).epsilon(1e-9));
            CHECK(-s.p[i] == doctest::Approx(start.p[i]).epsilon(1e-9));
        }
        CHECK(-s.friction == doctest::Approx(start.friction).epsilon(1e-9));
    }

    TEST_CASE("without thermostat coupling the scheme conserves energy to O(dt^2)")
    {
        const DynamicsParams params{1.0, 0.0, 1e12, 1, std::nullopt};
        Harmonic model{1};
        BadodabStepper<Harmonic> st(model, params, 0.1);
        ZeroNoise z;
        SamplerState s{{1.0}, {0.0}, 0.0};
        const double e0 = energy_h(s);
        double worst = 0.0;
        for (int k = 0; k < 10000; ++k) {
            st.step(s, z);
            worst = std::max(worst, std::abs(energy_h(s) - e0));
        }
        // Verlet on the oscillator: |dH| <= h^2/8 * H / (1 - h^2/4)
        CHECK(worst <= 0.01 * 0.125 / (1 - 0.0025) + 1e-12);
        CHECK(worst > 1e-6);
    }

    TEST_CASE("odabado samples the kinetic temperature")
    {
        auto rng = rng_derive(21, 0);
        const auto params = normalize_params(1.0, 1.0, 1.0, 0.0);
        Harmonic model{1};
        OdabadoStepper<ExactGradient<Harmonic>> stepper(ExactGradient<Harmonic>{&model}, 1.0, *params.raw, 0.05);
        SamplerState s{{0.0}, {1.0}, 0.5, FrictionForm::Raw};
        double p2 = 0.0;
        const int steps = 200000;
        for (int k = 0; k < steps; ++k) {
            stepper.step(s, rng);
            p2 += s.p[0] * s.p[0];
        }
        CHECK(p2 / steps == doctest::Approx(1.0).epsilon(0.08));
        CHECK_THROWS_AS((OdabadoStepper<ExactGradient<Harmonic>>(ExactGradient<Harmonic>{&model}, 1.0,
                                                                 RawParams{0.0, 1.0, 0.0}, 0.1)),
                        ParameterError);
    }

    TEST_CASE("minibatch noise is absorbed by positive mean friction")
    {
        const auto post = BlrPosterior::make(small_blr_data(), 100.0);
        const auto mode = blr_map_estimate(post);
        const RawParams raw{1.0, 0.0, 0.0};
        auto rng = rng_derive(4, 0);
        SamplerState s{mode, {0.0, 0.0}, 0.0, FrictionForm::Raw};
        double zeta = 0.0;
        const int steps = 20000;
        for (int k = 0; k < steps; ++k) {
            s = odabado_step(s, 1.0, raw, post, 5, 0.01, rng);
            zeta += s.friction;
        }
        CHECK(zeta / steps > 0.0);
        CHECK_THROWS_AS(odabado_step(s, 1.0, raw, Harmonic{2}, 5, 0.01, rng), ParameterError);
    }

    TEST_CASE("spec validation")
    {
        SamplerSpec spec;
        spec.params = DynamicsParams::normalized(1, 1, 1, 1);
        CHECK_NOTHROW(spec.validate());
        spec.params.n = 3;
        CHECK_THROWS_AS(spec.validate(), DimensionError);
        spec.params.n = 1;
        spec.minibatch = 4;
        CHECK_THROWS_AS(spec.validate(), ParameterError);
        spec.minibatch = 0;
        spec.scheme = Scheme::Odabado;
        CHECK_THROWS_AS(spec.validate(), ParameterError);
        CHECK(spec.form() == FrictionForm::Raw);
    }

    TEST_CASE("simulate")
    {
        SamplerSpec spec;
        spec.model = DoubleWell::make(1, 1, 0.5);
        spec.params = DynamicsParams::normalized(1, 1, 1, 1);
        const SamplerState init{{0.1}, {0.0}, 0.0};
        const auto obs = parse_observables({"q", "2"}, 1.0);

        auto r0 = rng_derive(1, 0);
        const auto empty = simulate(init, spec, StepConfig{0.01, 0, 1}, obs, r0);
        CHECK(empty.values.rows() == 1);
        CHECK(empty.values(0, 0) == 0.1);

        auto r1 = rng_derive(8, 2);
        auto r2 = rng_derive(8, 2);
        const auto a = simulate(init, spec, StepConfig{0.01, 100, 10}, obs, r1);
        const auto b = simulate(init, spec, StepConfig{0.01, 100, 10}, obs, r2);
        CHECK(a.values.rows() == 11);
        CHECK(a.steps.back() == 100);
        CHECK(a.times.back() == doctest::Approx(1.0));
        CHECK(a.values == b.values);
        CHECK((a.values.col(1).array() == 2.0).all());

        CHECK_THROWS_AS(simulate(init, spec, StepConfig{0.01, 10, 1}, parse_observables({"q[2]"}, 1), r1),
                        DimensionError);
        SamplerState raw_init = init;
        raw_init.form = FrictionForm::Raw;
        CHECK_THROWS_AS(simulate(raw_init, spec, StepConfig{0.01, 10, 1}, obs, r1), ParameterError);
    }

    TEST_CASE("divergence reports the last finite state")
    {
        SamplerSpec spec;
        spec.model = Harmonic{1};
        spec.params = DynamicsParams::normalized(1, 1e-3, 1, 1);
        const SamplerState init{{1.0}, {0.0}, 0.0};
        auto rng = rng_derive(2, 0);
        try {
            simulate(init, spec, StepConfig{3.0, 100000, 1}, parse_observables({"q"}, 1), rng);
            FAIL("expected divergence");
        } catch (const DivergenceError& e) {
            CHECK(e.step() > 1);
            CHECK(e.exit_code() == 4);
            REQUIRE(e.last_q().size() == 1);
            CHECK(std::isfinite(e.last_q()[0]));
            CHECK(std::abs(e.last_q()[0]) <= 1e100);
        }
    }
}
