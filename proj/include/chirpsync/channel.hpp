#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "chirpsync/random.hpp"
#include "chirpsync/signal.hpp"
#include "chirpsync/types.hpp"

namespace chirpsync {

enum class ChannelMode {
    Static,   // one realization for the whole frame
    Varying,  // independent taps per OFDM symbol
};

/// Rayleigh multipath with exponential power delay profile E|h(l)|^2 = exp(-l/D).
struct ChannelProfile {
    std::size_t path_count = 4;
    double decay = 2.0;
    ChannelMode mode = ChannelMode::Varying;
    bool normalize_power = true;

    void validate() const;
    /// Expected power of each tap after optional normalization.
    std::vector<double> tap_powers() const;
    /// Sum of tap_powers(); 1 when normalize_power is set.
    double mean_power() const;
};

struct ChannelRealization {
    std::vector<Complex> taps;
    double phase_0 = 0.0;  // common phase offset, [0, 2*pi)

    friend bool operator==(const ChannelRealization&, const ChannelRealization&) = default;
};

struct ImpairmentSpec {
    double cfo = 0.0;  // normalized to subcarrier spacing
    double snr_db = 20.0;
    bool noise_enabled = true;

    /// Per-sample complex noise variance for a given mean received signal power.
    double noise_variance(double signal_power) const;
};

/// Output of the channel. `stream` keeps the cyclic prefixes; `symbols` holds the
/// N-sample windows after CP removal, assuming perfect timing.
struct ReceivedFrame {
    SampleBuffer stream;
    std::vector<SampleBuffer> symbols;
    std::vector<ChannelRealization> realizations;  // one per symbol, for diagnostics
};

ChannelRealization draw_channel(const ChannelProfile& profile, RandomSource& rng);

/// Draws per-symbol realizations according to profile.mode. The common phase is
/// drawn once per frame and shared by all symbols.
std::vector<ChannelRealization> draw_frame_channels(const ChannelProfile& profile,
                                                    std::size_t symbol_count, RandomSource& rng);

/// Applies the given realizations (one per symbol), the CFO rotation and AWGN.
/// The rotation index runs continuously over the whole frame, CP included.
ReceivedFrame transmit(const PreambleFrame& frame, std::span<const ChannelRealization> channels,
                       const ImpairmentSpec& imp, double signal_power, RandomSource& rng);

/// Draws channels per the profile and transmits the frame through them.
ReceivedFrame transmit(const PreambleFrame& frame, const ChannelProfile& profile,
                       const ImpairmentSpec& imp, RandomSource& rng);

/// Splits a received CP-prefixed stream into its CP-free symbol windows.
std::vector<SampleBuffer> strip_cyclic_prefix(std::span<const Complex> stream, std::size_t n_fft,
                                              std::size_t cp_len, std::size_t symbol_count);

}  // namespace chirpsync
