#include <doctest.h>

#include "adl/error.hpp"
#include "adl/observables.hpp"

using namespace adl;

TEST_SUITE("observables")
{
    const SamplerState s{{1.5, -2.0}, {0.5, 3.0}, -0.25};

    TEST_CASE("evaluation")
    {
        CHECK(Observable::parse("q")(s) == 1.5);
        CHECK(Observable::parse("q^2")(s) == 2.25);
        CHECK(Observable::parse("q2")(s) == 2.25);
        CHECK(Observable::parse("p^2 - 1/beta", 2.0)(s) == doctest::Approx(-0.25));
        CHECK(Observable::parse("q*p")(s) == 0.75);
        CHECK(Observable::parse("q*q*q")(s) == doctest::Approx(3.375));
        CHECK(Observable::parse("xi^2")(s) == 0.0625);
        CHECK(Observable::parse("q[1]")(s) == -2.0);
        CHECK(Observable::parse("-2*q[1]^2 + 1")(s) == doctest::Approx(-7.0));
        CHECK(Observable::parse("  3  ")(s) == 3.0);
    }

    TEST_CASE("structure queries")
    {
        const auto o = Observable::parse("q^3 + p[1]^2");
        CHECK(o.degree(Observable::Variable::Q) == 3);
        CHECK(o.degree(Observable::Variable::P) == 2);
        CHECK(o.min_dimension() == 2);
        CHECK(Observable::parse("2").min_dimension() == 0);
        CHECK(o.name() == "q^3 + p[1]^2");
    }

    TEST_CASE("rejects malformed text")
    {
        CHECK_THROWS_AS(Observable::parse(""), ParameterError);
        CHECK_THROWS_AS(Observable::parse("q^"), ParameterError);
        CHECK_THROWS_AS(Observable::parse("foo"), ParameterError);
        CHECK_THROWS_AS(Observable::parse("1/q"), ParameterError);
        CHECK_THROWS_AS(Observable::parse("q[0"), ParameterError);
        CHECK_THROWS_AS(Observable::parse("xi[1]"), ParameterError);
        CHECK_THROWS_AS(Observable::parse("q^-1"), ParameterError);
        CHECK_THROWS_AS(Observable::parse("q q"), ParameterError);
    }
}
