#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ristrack/channel.hpp"
#include "ristrack/ekf_tracker.hpp"
#include "ristrack/pf_tracker.hpp"

namespace ristrack {

struct TrackerSpec {
    enum class Kind { Ekf, Pf };

    Kind kind = Kind::Pf;
    int n_particles = 0; // zero for the EKF

    std::string name() const { return kind == Kind::Ekf ? "ekf" : "pf"; }
    /// "EKF" or "PF-<N>"
    std::string label() const;

    friend bool operator==(const TrackerSpec&, const TrackerSpec&) = default;
};

enum class PhasePolicy {
    BeamMatch, // RIS phases follow the latest estimate
    Random,    // fresh random phases every slot
    Fixed      // matched to the block-start estimate and held
};

std::string to_string(PhasePolicy p);
PhasePolicy parse_phase_policy(const std::string& s);

struct ExperimentConfig {
    Geometry geometry;
    ArrayConfig array;
    MobilityConfig mobility{deg_to_rad(0.5), deg_to_rad(0.5)};
    PathLossModel path_loss;

    std::vector<double> p_tx_dbm{0, 5, 10, 15, 20, 25, 30, 35, 40};
    double noise_dbm = -84.0; // -inf for a noiseless run

    std::vector<TrackerSpec> trackers{{TrackerSpec::Kind::Ekf, 0},
                                      {TrackerSpec::Kind::Pf, 50},
                                      {TrackerSpec::Kind::Pf, 200}};
    ProcessNoiseMode qu_mode = ProcessNoiseMode::UniformVariance;
    double pf_init_spread = 0.0;
    ResampleMode pf_resample = ResampleMode::Always;
    double pf_ess_fraction = 0.5;

    std::vector<PhasePolicy> policies{PhasePolicy::BeamMatch};

    int slots_per_block = 100;
    int n_blocks = 1500;
    std::uint64_t seed = 1;
    double init_perturbation_std = 0.0;
    double ue_jitter_m = 0.0;
    bool record_trajectory = false;

    double sigma2() const;
    void validate() const;
};

/// Parses the key = value format documented in configs/README.md.
/// Throws ConfigError with a line number on any problem.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(write_config(c)) reproduces c.
std::string write_config(const ExperimentConfig& cfg);

} // namespace ristrack
