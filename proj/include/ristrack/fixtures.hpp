#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ristrack/config.hpp"

namespace ristrack {

/// 10-slot EKF regression scenario: default geometry, L = 4, 30 dBm, beam matching.
ExperimentConfig frozen_ekf_scenario();
inline constexpr std::uint64_t kFrozenEkfSeed = 2024;

/// Oracle fixtures (geometry angles, path gain, resampling sweep, EKF
/// trajectory) as pretty-printed JSON.
std::string fixtures_json();
void write_fixtures(const std::filesystem::path& path);

} // namespace ristrack
