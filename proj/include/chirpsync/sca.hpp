#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chirpsync/estimator.hpp"
#include "chirpsync/random.hpp"
#include "chirpsync/signal.hpp"
#include "chirpsync/types.hpp"

namespace chirpsync {

/// Two-symbol Schmidl-Cox training sequence.
///
/// Symbol 1 carries QPSK on even subcarriers only, so its time-domain form has
/// two identical halves. Symbol 2 carries QPSK on every subcarrier. v(i) relates
/// the two symbols on even bin 2i and drives the integer-offset metric.
struct ScaPreamble {
    std::size_t n_fft = 0;
    std::size_t cp_len = 0;
    std::vector<Complex> pn_even_1;  // N/2 values, bin 2i of symbol 1
    std::vector<Complex> pn_2;       // N values
    std::vector<Complex> v;          // N/2 values, pn_2(2i) / pn_even_1(i)
    PreambleFrame frame;             // both symbols, CP-prefixed, unit average power
};

/// Draws fresh random QPSK training symbols.
ScaPreamble sca_build_preamble(std::size_t n_fft, std::size_t cp_len, RandomSource& rng);

/// Half-symbol autocorrelation P = sum_{n<N/2} conj(r(n)) r(n + N/2) of symbol 1.
Complex sca_half_autocorr(std::span<const Complex> symbol_1);

/// Integer-offset metric for an even shift of 2g bins:
///   B(g) = |sum_i conj(X1(2i+2g)) conj(v(i)) X2(2i+2g)|^2 / (2 * (sum_k |X2(k)|^2)^2)
double sca_metric(std::span<const Complex> x1, std::span<const Complex> x2, std::span<const Complex> v,
                  std::ptrdiff_t g);

/// Fractional offset arg(P)/pi in (-1, 1], then the even shift 2g (|g| <=
/// search_range) that maximizes B(g). Ties go to the most negative g.
/// `symbols` are the two CP-free training windows.
CfoEstimate sca_estimate(std::span<const SampleBuffer> symbols, const ScaPreamble& pre,
                         std::size_t search_range, const EstimatorOptions& options = {});

inline std::size_t sca_default_search_range(std::size_t n_fft) { return n_fft / 4; }

}  // namespace chirpsync
