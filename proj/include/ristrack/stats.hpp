#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ristrack/experiment.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

/// Paired block bootstrap of NMSE(a) - NMSE(b), where each NMSE is a ratio of
/// summed error to summed power over the resampled blocks. Blocks of a and b
/// with the same index share their random streams, so they are resampled together.
inline std::vector<double> bootstrap_nmse_difference(std::span<const NmseAccumulator> a,
                                                     std::span<const NmseAccumulator> b, int replicates,
                                                     std::uint64_t seed)
{
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("bootstrap: block lists must be non-empty and paired");
    SeededRng rng(seed);
    const std::size_t n = a.size();
    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(replicates));
    for (int r = 0; r < replicates; ++r) {
        NmseAccumulator sa;
        NmseAccumulator sb;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t pick = static_cast<std::size_t>(rng.next_u64() % n);
            sa += a[pick];
            sb += b[pick];
        }
        diffs.push_back(sa.value() - sb.value());
    }
    return diffs;
}

/// Empirical quantile with linear interpolation; q in [0, 1].
inline double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// True when NMSE(a) <= NMSE(b) holds at one-sided 95% bootstrap confidence.
inline bool nmse_le_confident(std::span<const NmseAccumulator> a, std::span<const NmseAccumulator> b,
                              int replicates = 2000, std::uint64_t seed = 7)
{
    return quantile(bootstrap_nmse_difference(a, b, replicates, seed), 0.95) <= 0.0;
}

} // namespace ristrack
