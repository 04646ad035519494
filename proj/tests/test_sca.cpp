#include <doctest.h>

#include <cmath>

#include "chirpsync/channel.hpp"
#include "chirpsync/sca.hpp"
#include "oracles.hpp"

using namespace chirpsync;

namespace {

ReceivedFrame through(const ScaPreamble& pre, double eps, ChannelMode mode, double snr_db, bool noise,
                      RandomSource& rng) {
    ChannelProfile prof;
    prof.mode = mode;
    return transmit(pre.frame, prof, ImpairmentSpec{eps, snr_db, noise}, rng);
}

}  // namespace

TEST_CASE("training symbol 1 has identical halves") {
    RandomSource rng(1);
    for (std::size_t n : {64U, 128U}) {
        const auto pre = sca_build_preamble(n, 16, rng);
        const auto s1 = pre.frame.symbol(0);
        for (std::size_t i = 0; i < n / 2; ++i) CHECK(std::abs(s1[i] - s1[i + n / 2]) < 1e-12);
        CHECK(pre.frame.samples.size() == 2 * (n + 16));
    }
}

TEST_CASE("training symbols have unit average power") {
    RandomSource rng(2);
    const auto pre = sca_build_preamble(128, 0, rng);
    for (std::size_t s = 0; s < 2; ++s) {
        double p = 0.0;
        for (const auto& v : pre.frame.symbol(s)) p += std::norm(v);
        CHECK(p / 128.0 == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < pre.v.size(); ++i) {
        CHECK(std::abs(pre.v[i] * pre.pn_even_1[i] - pre.pn_2[2 * i]) < 1e-15);
        CHECK(std::abs(std::abs(pre.v[i]) - 1.0) < 1e-15);
    }
}

TEST_CASE("preamble is deterministic for a seed") {
    RandomSource a(9), b(9);
    CHECK(sca_build_preamble(64, 8, a).frame.samples == sca_build_preamble(64, 8, b).frame.samples);
    CHECK_THROWS_AS(sca_build_preamble(48, 8, a), ConfigError);
}

TEST_CASE("noiseless static channel recovers even offsets") {
    RandomSource rng(3);
    for (double eps : {20.0, 0.0, -20.0, 20.4, -7.3}) {
        const auto pre = sca_build_preamble(128, 16, rng);
        const auto rx = through(pre, eps, ChannelMode::Static, 0.0, false, rng);
        const auto est = sca_estimate(rx.symbols, pre, sca_default_search_range(128));
        CHECK(est.total == doctest::Approx(eps).epsilon(1e-9));
    }
}

TEST_CASE("metric peaks at the true shift for every g strictly inside the range") {
    RandomSource rng(4);
    const auto pre = sca_build_preamble(128, 0, rng);
    const std::size_t range = sca_default_search_range(128);
    const std::vector<ChannelRealization> flat(2, ChannelRealization{{Complex{1.0, 0.0}}, 0.7});
    // g = +-N/4 are the same bins modulo N; the tie goes to the negative end.
    for (int g0 = -static_cast<int>(range) + 1; g0 < static_cast<int>(range); ++g0) {
        const auto rx = transmit(pre.frame, flat, ImpairmentSpec{2.0 * g0, 0.0, false}, 1.0, rng);
        const auto est = sca_estimate(rx.symbols, pre, range, EstimatorOptions{false});
        CHECK(est.ifo_residual == 2 * g0);

        FftPlan plan(128);
        auto x1 = rx.symbols[0];
        auto x2 = rx.symbols[1];
        plan.forward(x1);
        plan.forward(x2);
        // Flat channel, no noise: |num| = sqrt(2) N/2, energy = N, so B = 1/4.
        CHECK(sca_metric(x1, x2, pre.v, g0) == doctest::Approx(0.25).epsilon(1e-9));
    }
    const auto edge = transmit(pre.frame, flat, ImpairmentSpec{64.0, 0.0, false}, 1.0, rng);
    CHECK(sca_estimate(edge.symbols, pre, range, EstimatorOptions{false}).ifo_residual == -64);
}

TEST_CASE("fractional estimate follows half-symbol phase") {
    RandomSource rng(5);
    const auto pre = sca_build_preamble(64, 0, rng);
    const std::vector<ChannelRealization> flat(2, ChannelRealization{{Complex{1.0, 0.0}}, 0.0});
    const auto rx = transmit(pre.frame, flat, ImpairmentSpec{0.37, 0.0, false}, 1.0, rng);
    const Complex p = sca_half_autocorr(rx.symbols[0]);
    CHECK(std::arg(p) == doctest::Approx(oracle::kPi * 0.37).epsilon(1e-9));
}

TEST_CASE("time-varying channel hurts SCA at 10 dB") {
    constexpr int kTrials = 10000;
    RandomSource rng(6);
    int fail_static = 0, fail_varying = 0;
    for (int i = 0; i < kTrials; ++i) {
        const auto pre = sca_build_preamble(128, 16, rng);
        for (auto mode : {ChannelMode::Static, ChannelMode::Varying}) {
            const auto rx = through(pre, 20.0, mode, 10.0, true, rng);
            const auto est = sca_estimate(rx.symbols, pre, 32, EstimatorOptions{false});
            if (est.ifo_residual != 20) (mode == ChannelMode::Static ? fail_static : fail_varying)++;
        }
    }
    MESSAGE("static failures " << fail_static << ", varying failures " << fail_varying);
    CHECK(fail_varying > fail_static);
    CHECK(fail_varying > kTrials / 20);
}

TEST_CASE("input validation") {
    RandomSource rng(7);
    const auto pre = sca_build_preamble(64, 0, rng);
    const std::vector<SampleBuffer> syms{SampleBuffer(64, Complex{1.0, 0.0}), SampleBuffer(64, Complex{1.0, 0.0})};
    CHECK_THROWS_AS(sca_estimate(syms, pre, 17), ConfigError);
    const std::vector<SampleBuffer> zero{SampleBuffer(64), SampleBuffer(64)};
    CHECK_THROWS_AS(sca_estimate(zero, pre, 16), DegenerateSignalError);
    CHECK_THROWS_AS(sca_estimate(zero, pre, 16, EstimatorOptions{false}), DegenerateSignalError);
}
