#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "chirpsync/types.hpp"

namespace chirpsync {

/// SplitMix64 finalizer. Used to turn structured indices into well-mixed seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based seed derivation: hashes a master seed together with any number of indices.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices) noexcept;

/// Seeded random stream for channel and noise generation.
///
/// Only the Mersenne Twister engine itself is taken from <random>; the uniform and
/// Gaussian transforms are done here because the standard distributions are
/// implementation-defined and would break cross-platform reproducibility.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform on [0, 2*pi).
    double uniform_angle();
    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    Complex complex_normal(double variance);

private:
    std::mt19937_64 engine_;
};

}  // namespace chirpsync
