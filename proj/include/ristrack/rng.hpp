#pragma once

#include <cstdint>
#include <random>

#include "ristrack/core_math.hpp"

namespace ristrack {

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; the mapping to real numbers is done
/// here rather than through <random> distributions, which are not portable.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi]. Throws std::invalid_argument when lo > hi.
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller; consumes two engine outputs per call.
    double normal();

    /// Circularly-symmetric complex Gaussian CN(0, variance).
    Complex cgauss(double variance);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for sub-stream `stream` of a parent seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);

double sample_uniform(SeededRng& rng, double lo, double hi);
Complex sample_cgauss(SeededRng& rng, double variance);

} // namespace ristrack
