#include "chirpsync/signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace chirpsync {

void CazacParams::validate() const {
    if (!is_power_of_two(n_fft)) {
        throw ConfigError("N must be a power of two (got " + std::to_string(n_fft) + ")");
    }
    if (rate == 0 || n_fft % rate != 0) {
        throw ConfigError("chirp rate r=" + std::to_string(rate) + " must divide N=" +
                          std::to_string(n_fft));
    }
    if (rate % 2 != 0) {
        throw ConfigError("chirp rate r=" + std::to_string(rate) + " must be even");
    }
}

FftPlan::FftPlan(std::size_t n) : n_(n), scale_(0.0) {
    if (!is_power_of_two(n)) {
        throw ConfigError("transform length must be a power of two (got " + std::to_string(n) + ")");
    }
    scale_ = 1.0 / std::sqrt(static_cast<double>(n));

    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        twiddles_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                           static_cast<double>(n));
    }

    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    bit_reverse_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b) {
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        }
        bit_reverse_[i] = r;
    }
}

void FftPlan::forward(std::span<Complex> data) const { transform(data, false); }

void FftPlan::inverse(std::span<Complex> data) const { transform(data, true); }

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
    if (data.size() != n_) {
        throw ConfigError("transform length mismatch: plan " + std::to_string(n_) + ", data " +
                          std::to_string(data.size()));
    }
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j = bit_reverse_[i];
        if (i < j) std::swap(data[i], data[j]);
    }
    // Iterative decimation-in-time butterflies.
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                Complex w = twiddles_[k * stride];
                if (inverse) w = std::conj(w);
                const Complex a = data[start + k];
                const Complex b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
    }
    for (auto& v : data) v *= scale_;
}

SampleBuffer dft(std::span<const Complex> x) {
    FftPlan plan(x.size());
    SampleBuffer out(x.begin(), x.end());
    plan.forward(out);
    return out;
}

SampleBuffer idft(std::span<const Complex> x) {
    FftPlan plan(x.size());
    SampleBuffer out(x.begin(), x.end());
    plan.inverse(out);
    return out;
}

SampleBuffer cazac_generate(const CazacParams& params) {
    params.validate();
    const std::size_t n_fft = params.n_fft;
    const std::size_t two_n = 2 * n_fft;
    SampleBuffer x(n_fft);
    for (std::size_t n = 0; n < n_fft; ++n) {
        // Reduce r*n^2 modulo 2N in integers so the phase stays in [0, 2*pi).
        const std::size_t sq = (n * n) % two_n;
        const std::size_t phase_units = (params.rate * sq) % two_n;
        x[n] = std::polar(1.0, std::numbers::pi * static_cast<double>(phase_units) /
                                   static_cast<double>(n_fft));
    }
    return x;
}

void PreambleSpec::validate() const {
    first.validate();
    second.validate();
    if (first.n_fft != second.n_fft) {
        throw ConfigError("both preamble symbols must share the same N");
    }
}

void check_channel_compatibility(const PreambleSpec& spec, std::size_t path_count) {
    if (path_count == 0) throw ConfigError("channel needs at least one path");
    const std::size_t n = spec.n_fft();
    if (spec.first.rate * path_count > spec.second.rate) {
        throw ConfigError("combs not separable: need r1*L <= r2 (r1=" + std::to_string(spec.first.rate) +
                          ", L=" + std::to_string(path_count) +
                          ", r2=" + std::to_string(spec.second.rate) + ")");
    }
    if (spec.second.rate * path_count >= n) {
        throw ConfigError("combs not separable: need r2 < N/L (r2=" + std::to_string(spec.second.rate) +
                          ", N=" + std::to_string(n) + ", L=" + std::to_string(path_count) + ")");
    }
    if (spec.cp_len + 1 < path_count) {
        throw ConfigError("cyclic prefix of " + std::to_string(spec.cp_len) +
                          " samples is shorter than the channel memory L-1=" +
                          std::to_string(path_count - 1));
    }
}

std::span<const Complex> PreambleFrame::symbol(std::size_t k) const {
    if (k >= symbol_count()) throw std::out_of_range("preamble symbol index out of range");
    return std::span<const Complex>(samples).subspan(k * symbol_length() + cp_len, n_fft);
}

SampleBuffer add_cyclic_prefix(std::span<const Complex> symbol, std::size_t cp_len) {
    if (cp_len > symbol.size()) throw ConfigError("cyclic prefix longer than the symbol");
    SampleBuffer out;
    out.reserve(symbol.size() + cp_len);
    out.insert(out.end(), symbol.end() - static_cast<std::ptrdiff_t>(cp_len), symbol.end());
    out.insert(out.end(), symbol.begin(), symbol.end());
    return out;
}

PreambleFrame build_preamble(const PreambleSpec& spec) {
    spec.validate();
    PreambleFrame frame;
    frame.n_fft = spec.n_fft();
    frame.cp_len = spec.cp_len;
    for (const auto& params : {spec.first, spec.second}) {
        const auto ext = add_cyclic_prefix(cazac_generate(params), spec.cp_len);
        frame.samples.insert(frame.samples.end(), ext.begin(), ext.end());
    }
    return frame;
}

}  // namespace chirpsync
