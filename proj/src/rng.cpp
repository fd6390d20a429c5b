#include "ristrack/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ristrack {

double SeededRng::uniform(double lo, double hi)
{
    if (!(lo <= hi))
        throw std::invalid_argument("uniform: lo (" + std::to_string(lo) + ") > hi (" + std::to_string(hi) + ")");
    if (lo == hi)
        return lo;
    return lo + (hi - lo) * uniform01();
}

double SeededRng::normal()
{
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Complex SeededRng::cgauss(double variance)
{
    if (!(variance >= 0.0))
        throw std::invalid_argument("cgauss: negative variance");
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-variance * std::log(u1));
    const double phase = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phase), r * std::sin(phase)};
}

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream)
{
    return mix_seed(mix_seed(parent) ^ (stream * 0xd1b54a32d192ed03ULL));
}

double sample_uniform(SeededRng& rng, double lo, double hi) { return rng.uniform(lo, hi); }

Complex sample_cgauss(SeededRng& rng, double variance) { return rng.cgauss(variance); }

} // namespace ristrack
