#include "chirpsync/sca.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace chirpsync {

namespace {

Complex random_qpsk(RandomSource& rng) {
    static constexpr std::array<Complex, 4> kPoints{Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                                    Complex{0, -1}};
    const auto idx = static_cast<std::size_t>(rng.uniform() * 4.0);
    return kPoints[idx < 4 ? idx : 3];
}

std::size_t wrap_bin(std::ptrdiff_t k, std::size_t n) {
    const auto nn = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((k % nn) + nn) % nn);
}

}  // namespace

ScaPreamble sca_build_preamble(std::size_t n_fft, std::size_t cp_len, RandomSource& rng) {
    if (!is_power_of_two(n_fft) || n_fft < 4) {
        throw ConfigError("SCA preamble needs a power-of-two N >= 4 (got " + std::to_string(n_fft) + ")");
    }
    ScaPreamble pre;
    pre.n_fft = n_fft;
    pre.cp_len = cp_len;

    const std::size_t half = n_fft / 2;
    pre.pn_even_1.resize(half);
    pre.pn_2.resize(n_fft);
    pre.v.resize(half);
    for (auto& c : pre.pn_even_1) c = random_qpsk(rng);
    for (auto& c : pre.pn_2) c = random_qpsk(rng);
    for (std::size_t i = 0; i < half; ++i) pre.v[i] = pre.pn_2[2 * i] / pre.pn_even_1[i];

    // sqrt(2) on the half-loaded symbol keeps both symbols at unit average power
    // under the unitary transform.
    SampleBuffer spectrum_1(n_fft, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < half; ++i) spectrum_1[2 * i] = std::sqrt(2.0) * pre.pn_even_1[i];
    const auto symbol_1 = idft(spectrum_1);
    const auto symbol_2 = idft(pre.pn_2);

    pre.frame.n_fft = n_fft;
    pre.frame.cp_len = cp_len;
    for (const auto* sym : {&symbol_1, &symbol_2}) {
        const auto ext = add_cyclic_prefix(*sym, cp_len);
        pre.frame.samples.insert(pre.frame.samples.end(), ext.begin(), ext.end());
    }
    return pre;
}

Complex sca_half_autocorr(std::span<const Complex> symbol_1) {
    const std::size_t half = symbol_1.size() / 2;
    Complex acc{0.0, 0.0};
    for (std::size_t n = 0; n < half; ++n) acc += std::conj(symbol_1[n]) * symbol_1[n + half];
    return acc;
}

double sca_metric(std::span<const Complex> x1, std::span<const Complex> x2, std::span<const Complex> v,
                  std::ptrdiff_t g) {
    const std::size_t n = x2.size();
    Complex num{0.0, 0.0};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t k = wrap_bin(static_cast<std::ptrdiff_t>(2 * i) + 2 * g, n);
        num += std::conj(x1[k]) * std::conj(v[i]) * x2[k];
    }
    double energy = 0.0;
    for (const auto& c : x2) energy += std::norm(c);
    return std::norm(num) / (2.0 * energy * energy);
}

CfoEstimate sca_estimate(std::span<const SampleBuffer> symbols, const ScaPreamble& pre,
                         std::size_t search_range, const EstimatorOptions& options) {
    const std::size_t n = pre.n_fft;
    if (symbols.size() < 2 || symbols[0].size() != n || symbols[1].size() != n) {
        throw ConfigError("SCA estimator needs two windows of " + std::to_string(n) + " samples");
    }
    if (search_range > n / 4) {
        throw ConfigError("SCA search range must not exceed N/4 = " + std::to_string(n / 4));
    }

    CfoEstimate est;
    if (options.ffo_stage) {
        const Complex p = sca_half_autocorr(symbols[0]);
        if (std::abs(p) < 1e-12) throw DegenerateSignalError("SCA half-symbol correlation is zero");
        double phase = std::arg(p);
        if (phase <= -std::numbers::pi) phase = std::numbers::pi;
        est.ffo = phase / std::numbers::pi;
    }

    const FftPlan plan(n);
    auto x1 = compensate(symbols[0], est.ffo);
    auto x2 = compensate(symbols[1], est.ffo);
    plan.forward(x1);
    plan.forward(x2);

    double energy = 0.0;
    for (const auto& c : x2) energy += std::norm(c);
    if (energy < 1e-24) throw DegenerateSignalError("SCA second training symbol carries no energy");

    const auto range = static_cast<std::ptrdiff_t>(search_range);
    std::ptrdiff_t best_g = -range;
    double best = -1.0;
    for (std::ptrdiff_t g = -range; g <= range; ++g) {
        const double b = sca_metric(x1, x2, pre.v, g);
        if (b > best) {
            best = b;
            best_g = g;
        }
    }
    est.ifo_residual = 2 * best_g;
    est.total = static_cast<double>(est.ifo_residual) + est.ffo;
    return est;
}

}  // namespace chirpsync
