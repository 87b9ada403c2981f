#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msde/ensemble.hpp"
#include "msde/rng.hpp"

using namespace msde;

TEST_CASE("philox 4x32-10 known-answer vectors") {
    // Reference vectors published with the Random123 suite.
    auto out = Philox4x32::block({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("streams are deterministic and independent of draw interleaving") {
    RandomStream a(42, 7);
    RandomStream b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

    // drawing from another stream in between must not disturb stream 7
    RandomStream c(42, 7);
    RandomStream other(42, 8);
    std::vector<double> direct, interleaved;
    RandomStream d(42, 7);
    for (int i = 0; i < 50; ++i) direct.push_back(d.normal());
    for (int i = 0; i < 50; ++i) {
        interleaved.push_back(c.normal());
        (void)other.normal();
    }
    CHECK(direct == interleaved);
}

TEST_CASE("uniforms stay inside the open unit interval") {
    RandomStream rng(123, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal draws have the right first moments") {
    const int n = 200000;
    std::vector<double> draws(n);
    RandomStream rng(2024, 5);
    for (int i = 0; i < n; ++i) draws[i] = rng.normal();
    const MeanCi stats = mean_ci(draws);
    CHECK(std::abs(stats.mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    double m2 = 0.0, m4 = 0.0;
    for (double v : draws) {
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m2 /= n;
    m4 /= n;
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(m4 == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("pairwise sum is order-stable and accurate") {
    std::vector<double> values(100001, 0.1);
    values.push_back(1e16);
    const double sum = pairwise_sum(values);
    CHECK(sum == doctest::Approx(1e16 + 10000.1).epsilon(1e-12));
}
