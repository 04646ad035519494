#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace chirpsync {

using Complex = std::complex<double>;

/// Owning buffer of complex baseband samples. Length is fixed by the producer.
using SampleBuffer = std::vector<Complex>;

/// Invalid parameters or configuration (bad N, r, CP length, channel profile...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The received signal carries no usable phase information.
class DegenerateSignalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace chirpsync
