#include <doctest.h>

#include "adl/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace adl;

TEST_SUITE("rng")
{
    TEST_CASE("philox4x32-10 known-answer vectors")
    {
        // Reference vectors published with the Random123 library.
        const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
        CHECK(zero[0] == 0x6627e8d5u);
        CHECK(zero[1] == 0xe169c58du);
        CHECK(zero[2] == 0xbc57ac4cu);
        CHECK(zero[3] == 0x9b00dbd8u);

        const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
        CHECK(ones[0] == 0x408f276du);
        CHECK(ones[1] == 0x41c83b0eu);
        CHECK(ones[2] == 0xa20bc7c6u);
        CHECK(ones[3] == 0x6d5451fdu);

        const auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
        CHECK(pi[0] == 0xd16cfe09u);
        CHECK(pi[1] == 0x94fdccebu);
        CHECK(pi[2] == 0x5001e420u);
        CHECK(pi[3] == 0x24126ea1u);
    }

    TEST_CASE("same seed and stream give identical sequences")
    {
        auto a = rng_derive(42, 7);
        auto b = rng_derive(42, 7);
        CHECK(rng_gaussian(a, 1000) == rng_gaussian(b, 1000));
    }

    TEST_CASE("different streams differ")
    {
        auto a = rng_derive(42, 0);
        auto b = rng_derive(42, 1);
        auto c = rng_derive(43, 0);
        const double x = rng_gaussian(a, 1)[0];
        CHECK(x != rng_gaussian(b, 1)[0]);
        CHECK(x != rng_gaussian(c, 1)[0]);
    }

    TEST_CASE("gaussian moments")
    {
        auto s = rng_derive(2024, 3);
        const auto v = rng_gaussian(s, 1000000);
        double m = 0.0;
        for (double x : v)
            m += x;
        m /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v)
            var += (x - m) * (x - m);
        var /= static_cast<double>(v.size() - 1);
        CHECK(std::abs(m) < 5e-3);
        CHECK(std::abs(var - 1.0) < 1e-2);
    }

    TEST_CASE("uniform lies in the open unit interval")
    {
        auto s = rng_derive(1, 1);
        double lo = 1.0, hi = 0.0, sum = 0.0;
        for (int i = 0; i < 200000; ++i) {
            const double u = s.uniform();
            lo = std::min(lo, u);
            hi = std::max(hi, u);
            sum += u;
        }
        CHECK(lo > 0.0);
        CHECK(hi < 1.0);
        CHECK(sum / 200000.0 == doctest::Approx(0.5).epsilon(0.01));
    }

    TEST_CASE("uniform_index covers its range evenly")
    {
        auto s = rng_derive(5, 9);
        std::vector<int> counts(7, 0);
        const int draws = 700000;
        for (int i = 0; i < draws; ++i) {
            const auto k = s.uniform_index(7);
            REQUIRE(k < 7);
            ++counts[k];
        }
        for (int c : counts) // binomial sd ~ 293
            CHECK(std::abs(c - draws / 7) < 1500);
        CHECK(s.uniform_index(1) == 0);
    }

    TEST_CASE("streams do not depend on each other's consumption")
    {
        auto a1 = rng_derive(11, 0);
        auto b1 = rng_derive(11, 1);
        (void)rng_gaussian(a1, 12345);
        const auto after = rng_gaussian(b1, 10);
        auto b2 = rng_derive(11, 1);
        CHECK(rng_gaussian(b2, 10) == after);
    }
}
