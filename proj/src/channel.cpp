#include "chirpsync/channel.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace chirpsync {

void ChannelProfile::validate() const {
    if (path_count < 1) throw ConfigError("channel path count must be at least 1");
    if (!(decay > 0.0)) throw ConfigError("power delay profile decay must be positive");
}

std::vector<double> ChannelProfile::tap_powers() const {
    validate();
    std::vector<double> powers(path_count);
    for (std::size_t l = 0; l < path_count; ++l) {
        powers[l] = std::exp(-static_cast<double>(l) / decay);
    }
    if (normalize_power) {
        const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
        for (auto& p : powers) p /= total;
    }
    return powers;
}

double ChannelProfile::mean_power() const {
    const auto powers = tap_powers();
    return std::accumulate(powers.begin(), powers.end(), 0.0);
}

double ImpairmentSpec::noise_variance(double signal_power) const {
    if (!noise_enabled || std::isinf(snr_db)) return 0.0;
    return signal_power / std::pow(10.0, snr_db / 10.0);
}

ChannelRealization draw_channel(const ChannelProfile& profile, RandomSource& rng) {
    ChannelRealization ch;
    const auto powers = profile.tap_powers();
    ch.taps.reserve(powers.size());
    for (const double p : powers) ch.taps.push_back(rng.complex_normal(p));
    ch.phase_0 = rng.uniform_angle();
    return ch;
}

std::vector<ChannelRealization> draw_frame_channels(const ChannelProfile& profile,
                                                    std::size_t symbol_count, RandomSource& rng) {
    std::vector<ChannelRealization> channels;
    if (symbol_count == 0) return channels;
    channels.push_back(draw_channel(profile, rng));
    for (std::size_t s = 1; s < symbol_count; ++s) {
        if (profile.mode == ChannelMode::Static) {
            channels.push_back(channels.front());
        } else {
            auto next = draw_channel(profile, rng);
            next.phase_0 = channels.front().phase_0;
            channels.push_back(std::move(next));
        }
    }
    return channels;
}

std::vector<SampleBuffer> strip_cyclic_prefix(std::span<const Complex> stream, std::size_t n_fft,
                                              std::size_t cp_len, std::size_t symbol_count) {
    const std::size_t sym_len = n_fft + cp_len;
    if (stream.size() < sym_len * symbol_count) {
        throw ConfigError("stream holds " + std::to_string(stream.size()) + " samples, need " +
                          std::to_string(sym_len * symbol_count));
    }
    std::vector<SampleBuffer> symbols;
    symbols.reserve(symbol_count);
    for (std::size_t s = 0; s < symbol_count; ++s) {
        const auto window = stream.subspan(s * sym_len + cp_len, n_fft);
        symbols.emplace_back(window.begin(), window.end());
    }
    return symbols;
}

ReceivedFrame transmit(const PreambleFrame& frame, std::span<const ChannelRealization> channels,
                       const ImpairmentSpec& imp, double signal_power, RandomSource& rng) {
    const std::size_t sym_len = frame.symbol_length();
    const std::size_t symbols = frame.symbol_count();
    if (channels.size() != symbols) {
        throw ConfigError("need one channel realization per symbol");
    }
    for (const auto& ch : channels) {
        if (ch.taps.empty()) throw ConfigError("channel realization has no taps");
        if (ch.taps.size() > frame.cp_len + 1) {
            throw ConfigError("cyclic prefix of " + std::to_string(frame.cp_len) +
                              " samples cannot absorb " + std::to_string(ch.taps.size()) + " paths");
        }
    }

    const auto& x = frame.samples;
    const std::size_t total = symbols * sym_len;
    const double noise_var = imp.noise_variance(signal_power);
    const double n_fft = static_cast<double>(frame.n_fft);

    ReceivedFrame rx;
    rx.stream.resize(total);
    for (std::size_t n = 0; n < total; ++n) {
        // Linear convolution over the stream, using the taps of the symbol that
        // sample n belongs to. Earlier symbols only spill into this symbol's CP.
        const auto& ch = channels[n / sym_len];
        Complex acc{0.0, 0.0};
        for (std::size_t m = 0; m < ch.taps.size() && m <= n; ++m) acc += ch.taps[m] * x[n - m];

        const double phase =
            2.0 * std::numbers::pi * imp.cfo * static_cast<double>(n) / n_fft + ch.phase_0;
        acc *= std::polar(1.0, phase);
        if (noise_var > 0.0) acc += rng.complex_normal(noise_var);
        rx.stream[n] = acc;
    }
    rx.symbols = strip_cyclic_prefix(rx.stream, frame.n_fft, frame.cp_len, symbols);
    rx.realizations.assign(channels.begin(), channels.end());
    return rx;
}

ReceivedFrame transmit(const PreambleFrame& frame, const ChannelProfile& profile,
                       const ImpairmentSpec& imp, RandomSource& rng) {
    profile.validate();
    if (frame.cp_len + 1 < profile.path_count) {
        throw ConfigError("cyclic prefix of " + std::to_string(frame.cp_len) +
                          " samples is shorter than the channel memory L-1=" +
                          std::to_string(profile.path_count - 1));
    }
    const auto channels = draw_frame_channels(profile, frame.symbol_count(), rng);
    return transmit(frame, channels, imp, profile.mean_power(), rng);
}

}  // namespace chirpsync
