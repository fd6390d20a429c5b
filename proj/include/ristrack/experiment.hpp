#pragma once

#include <cstdint>
#include <vector>

#include "ristrack/config.hpp"

namespace ristrack {

/// Single-pair normalized error ||h_hat - h||^2 / ||h||^2.
/// Throws std::domain_error when h is zero.
double nmse(const ComplexVec& h_hat, const ComplexVec& h_true);

/// Accumulates error and true power separately; value() is their ratio.
struct NmseAccumulator {
    double error = 0.0;
    double power = 0.0;

    void add(const ComplexVec& h_hat, const ComplexVec& h_true);
    NmseAccumulator& operator+=(const NmseAccumulator& o);
    double value() const;
};

struct SweepPoint {
    TrackerSpec tracker;
    PhasePolicy policy = PhasePolicy::BeamMatch;
    double p_tx_dbm = 0.0;
};

struct SlotRecord {
    HiddenState truth;
    HiddenState estimate;
    Complex y;
    double error = 0.0; // ||H_hat - H||^2
    double power = 0.0; // ||H||^2
    double ess = 0.0;   // PF only
    int clamped = 0;
    bool degenerate = false;
    double innovation = 0.0; // EKF only
    double gain_norm = 0.0;  // EKF only

    friend bool operator==(const SlotRecord&, const SlotRecord&) = default;
};

struct BlockResult {
    std::vector<SlotRecord> slots;
    NmseAccumulator nmse;
    double ess_sum = 0.0;
    int degenerate_events = 0;
    int clamp_events = 0;
};

/// Random sub-streams of a block seed. Every sweep point of a block shares
/// the mobility, noise and initialization streams.
enum class Stream : std::uint64_t { Mobility = 1, Noise = 2, Tracker = 3, Phases = 4, Init = 5 };

/// Simulates one block: initial angles from geometry, tracker initialized at
/// the true state plus optional perturbation, then per slot: evolve angles,
/// observe with current phases, tracker step, record, update phases.
BlockResult run_block(const ExperimentConfig& cfg, const SweepPoint& point, std::uint64_t block_seed);

struct RunResult {
    SweepPoint point;
    int l = 0;
    double nmse = 0.0;
    double ess_mean = 0.0;
    long long degenerate_events = 0;
    long long clamp_events = 0;
    double seconds = 0.0;
    std::vector<NmseAccumulator> blocks;     // one per block, in block order
    std::vector<NmseAccumulator> per_slot;   // filled when record_trajectory is set

    double nmse_db() const;
};

/// Sweep order: trackers (outer), phase policies, then pTX (inner).
std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

/// Runs every sweep point over n_blocks blocks seeded base_seed + b.
/// threads <= 0 uses the hardware concurrency. Results do not depend on the
/// thread count.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, int threads = 1);

} // namespace ristrack
