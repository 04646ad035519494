#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chirpsync/types.hpp"

namespace chirpsync {

/// Parameters of one chirp preamble symbol x(n) = exp(j*pi*rate*n^2 / n_fft).
///
/// Valid parameters have a power-of-two n_fft and an even rate dividing n_fft.
/// Under those conditions x is periodic with period n_fft / rate, and the
/// circular extension x((n) mod N) equals the formula evaluated at n directly.
struct CazacParams {
    std::size_t n_fft = 0;
    std::size_t rate = 0;

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
    std::size_t period() const noexcept { return n_fft / rate; }

    friend bool operator==(const CazacParams&, const CazacParams&) = default;
};

/// Radix-2 transform with precomputed twiddles and bit-reversal table.
/// Both directions are unitary (scaled by 1/sqrt(N)).
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<Complex> data) const;
    void inverse(std::span<Complex> data) const;

private:
    void transform(std::span<Complex> data, bool inverse) const;

    std::size_t n_;
    std::vector<Complex> twiddles_;  // exp(-j*2*pi*k/N), k < N/2
    std::vector<std::size_t> bit_reverse_;
    double scale_;
};

/// X(k) = 1/sqrt(N) * sum_n x(n) exp(-j*2*pi*k*n/N). Length must be a power of two.
SampleBuffer dft(std::span<const Complex> x);
/// Inverse of dft(): same 1/sqrt(N) scale, positive exponent.
SampleBuffer idft(std::span<const Complex> x);

SampleBuffer cazac_generate(const CazacParams& params);

/// Two chirp symbols: the first (rate r1) serves the fractional and integer
/// stages, the second (rate r2) only the integer stage.
struct PreambleSpec {
    CazacParams first;
    CazacParams second;
    std::size_t cp_len = 0;

    void validate() const;
    std::size_t n_fft() const noexcept { return first.n_fft; }
    std::size_t symbol_length() const noexcept { return first.n_fft + cp_len; }
};

/// Throws ConfigError unless r1*L <= r2 < N/L and cp_len >= L - 1, i.e. the
/// two correlation combs stay separable for a channel with path_count taps.
void check_channel_compatibility(const PreambleSpec& spec, std::size_t path_count);

/// Transmitted frame of CP-prefixed symbols laid out back to back.
struct PreambleFrame {
    SampleBuffer samples;
    std::size_t n_fft = 0;
    std::size_t cp_len = 0;

    std::size_t symbol_length() const noexcept { return n_fft + cp_len; }
    std::size_t symbol_count() const noexcept {
        return symbol_length() == 0 ? 0 : samples.size() / symbol_length();
    }
    /// Symbol k without its cyclic prefix.
    std::span<const Complex> symbol(std::size_t k) const;
};

/// Prepends the last cp_len samples of each symbol to itself.
SampleBuffer add_cyclic_prefix(std::span<const Complex> symbol, std::size_t cp_len);

/// Assembles CP(cp_len) + x_r1 followed by CP(cp_len) + x_r2.
PreambleFrame build_preamble(const PreambleSpec& spec);

}  // namespace chirpsync
