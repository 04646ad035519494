#include "chirpsync/random.hpp"

#include <cmath>
#include <numbers>

namespace chirpsync {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices) noexcept {
    std::uint64_t h = mix64(master);
    for (const auto idx : indices) {
        h = mix64(h ^ mix64(idx + 0x632be59bd9b4e019ULL));
    }
    return h;
}

double RandomSource::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform_angle() {
    return 2.0 * std::numbers::pi * uniform();
}

Complex RandomSource::complex_normal(double variance) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-variance * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace chirpsync
