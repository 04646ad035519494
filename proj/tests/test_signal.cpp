#include <doctest.h>

#include <cmath>

#include "chirpsync/random.hpp"
#include "chirpsync/signal.hpp"
#include "oracles.hpp"

using namespace chirpsync;

namespace {

SampleBuffer random_buffer(std::size_t n, std::uint64_t seed) {
    RandomSource rng(seed);
    SampleBuffer x(n);
    for (auto& v : x) v = rng.complex_normal(1.0);
    return x;
}

}  // namespace

TEST_CASE("cazac params validation") {
    CHECK_NOTHROW(CazacParams{64, 2}.validate());
    CHECK_NOTHROW(CazacParams{128, 8}.validate());
    CHECK_THROWS_AS((CazacParams{63, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((CazacParams{64, 3}.validate()), ConfigError);   // does not divide
    CHECK_THROWS_AS((CazacParams{64, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((CazacParams{64, 1}.validate()), ConfigError);   // odd
    CHECK_THROWS_AS(cazac_generate({48, 2}), ConfigError);
}

TEST_CASE("cazac N=4 r=2 is [1, j, 1, j]") {
    const auto x = cazac_generate({4, 2});
    const SampleBuffer expected{{1, 0}, {0, 1}, {1, 0}, {0, 1}};
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(x[i] - expected[i]) < 1e-15);
}

TEST_CASE("cazac matches direct evaluation and has constant modulus") {
    for (std::size_t n : {16U, 64U, 128U, 256U}) {
        for (std::size_t r = 2; r <= n; r *= 2) {
            const auto x = cazac_generate({n, r});
            const auto ref = oracle::chirp(n, r);
            REQUIRE(x.size() == n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(std::abs(std::abs(x[i]) - 1.0) < 1e-12);
                CHECK(std::abs(x[i] - ref[i]) < 1e-10);
            }
        }
    }
}

TEST_CASE("cazac is periodic with period N/r") {
    const auto x = cazac_generate({64, 2});
    for (std::size_t n = 0; n < 32; ++n) CHECK(std::abs(x[n + 32] - x[n]) < 1e-12);

    const auto x8 = cazac_generate({128, 8});
    for (std::size_t n = 0; n + 16 < 128; ++n) CHECK(std::abs(x8[n + 16] - x8[n]) < 1e-12);
}

TEST_CASE("cazac periodic autocorrelation vanishes off multiples of N/r") {
    for (std::size_t n : {64U, 128U}) {
        for (std::size_t r : {2U, 8U}) {
            const auto x = cazac_generate({n, r});
            for (std::size_t d = 0; d < n; ++d) {
                Complex acc{0.0, 0.0};
                for (std::size_t i = 0; i < n; ++i) acc += x[(i + d) % n] * std::conj(x[i]);
                const double mag = std::abs(acc) / static_cast<double>(n);
                if (d % (n / r) == 0) {
                    CHECK(mag == doctest::Approx(1.0).epsilon(1e-12));
                } else {
                    CHECK(mag < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("dft of an impulse is flat 1/sqrt(N)") {
    SampleBuffer delta(64, Complex{0.0, 0.0});
    delta[0] = 1.0;
    const auto spec = dft(delta);
    for (const auto& v : spec) CHECK(std::abs(v - Complex{0.125, 0.0}) < 1e-15);
}

TEST_CASE("dft agrees with the direct O(N^2) sum") {
    for (std::size_t n : {1U, 2U, 8U, 64U, 128U}) {
        const auto x = random_buffer(n, 100 + n);
        const auto fast = dft(x);
        const auto slow = oracle::naive_dft(x, -1);
        CHECK(oracle::max_abs_diff(fast, slow) < 1e-12);
        CHECK(oracle::max_abs_diff(idft(x), oracle::naive_dft(x, +1)) < 1e-12);
    }
}

TEST_CASE("dft rejects non power of two lengths") {
    CHECK_THROWS_AS(dft(SampleBuffer(63)), ConfigError);
    CHECK_THROWS_AS(idft(SampleBuffer(0)), ConfigError);
    CHECK_THROWS_AS(FftPlan(100), ConfigError);
}

TEST_CASE("dft properties over random buffers") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = std::size_t{1} << (1 + seed % 8);
        const auto x = random_buffer(n, seed);
        const auto y = random_buffer(n, seed + 1000);
        const auto spec = dft(x);

        // Parseval
        double ex = 0.0, es = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ex += std::norm(x[i]);
            es += std::norm(spec[i]);
        }
        CHECK(std::abs(es - ex) / ex < 1e-12);

        // Round trip
        const auto back = idft(spec);
        CHECK(oracle::max_abs_diff(back, x) < 1e-12);

        // Linearity
        RandomSource rng(seed + 77);
        const Complex a = rng.complex_normal(1.0);
        const Complex b = rng.complex_normal(1.0);
        SampleBuffer mix(n);
        for (std::size_t i = 0; i < n; ++i) mix[i] = a * x[i] + b * y[i];
        const auto lhs = dft(mix);
        const auto fy = dft(y);
        SampleBuffer rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = a * spec[i] + b * fy[i];
        CHECK(oracle::max_abs_diff(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("dft of a chirp has constant modulus on its support") {
    const auto spec = dft(cazac_generate({64, 2}));
    // Period N/r = 32 in time puts energy on every r-th bin only.
    for (std::size_t k = 0; k < 64; ++k) {
        if (k % 2 == 0) {
            CHECK(std::abs(spec[k]) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
        } else {
            CHECK(std::abs(spec[k]) < 1e-12);
        }
    }
}

TEST_CASE("build_preamble layout") {
    SUBCASE("no cyclic prefix") {
        const PreambleSpec spec{{64, 2}, {64, 8}, 0};
        const auto frame = build_preamble(spec);
        REQUIRE(frame.samples.size() == 128);
        const auto x1 = cazac_generate({64, 2});
        const auto x2 = cazac_generate({64, 8});
        for (std::size_t i = 0; i < 64; ++i) {
            CHECK(frame.samples[i] == x1[i]);
            CHECK(frame.samples[64 + i] == x2[i]);
        }
    }
    SUBCASE("cyclic prefix copies the symbol tail") {
        const PreambleSpec spec{{64, 2}, {64, 8}, 16};
        const auto frame = build_preamble(spec);
        REQUIRE(frame.samples.size() == 160);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(frame.samples[i] == frame.samples[64 + i]);
            CHECK(frame.samples[80 + i] == frame.samples[80 + 64 + i]);
        }
        CHECK(frame.symbol_count() == 2);
        CHECK(frame.symbol(1)[0] == frame.samples[96]);
    }
    SUBCASE("symbol periods follow the rates") {
        const auto frame = build_preamble({{128, 2}, {128, 8}, 16});
        const auto s1 = frame.symbol(0);
        const auto s2 = frame.symbol(1);
        for (std::size_t i = 0; i + 64 < 128; ++i) CHECK(std::abs(s1[i + 64] - s1[i]) < 1e-12);
        for (std::size_t i = 0; i + 16 < 128; ++i) CHECK(std::abs(s2[i + 16] - s2[i]) < 1e-12);
        CHECK(std::abs(s1[33] - s1[1]) > 0.1);  // not shorter than 64
    }
    SUBCASE("mismatched N is rejected") {
        CHECK_THROWS_AS(build_preamble({{64, 2}, {128, 8}, 0}), ConfigError);
    }
}

TEST_CASE("channel compatibility check") {
    const PreambleSpec spec{{128, 2}, {128, 8}, 16};
    CHECK_NOTHROW(check_channel_compatibility(spec, 4));
    CHECK_THROWS_AS(check_channel_compatibility(spec, 5), ConfigError);   // r1*L = 10 > 8
    CHECK_THROWS_AS(check_channel_compatibility({{64, 2}, {64, 16}, 16}, 4), ConfigError);  // r2 >= N/L
    CHECK_THROWS_AS(check_channel_compatibility({{128, 2}, {128, 8}, 2}, 4), ConfigError);  // CP too short
}
