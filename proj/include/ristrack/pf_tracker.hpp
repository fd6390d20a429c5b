#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ristrack/channel.hpp"
#include "ristrack/rng.hpp"

namespace ristrack {

struct Particle {
    HiddenState state;
    double weight = 0.0;
};

struct ParticleSet {
    std::vector<Particle> particles;

    std::size_t size() const { return particles.size(); }
    double weight_sum() const;
    /// 1 / sum(w^2) of the normalized weights.
    double effective_sample_size() const;
};

enum class ResampleMode {
    Always,      // every slot
    EssThreshold // only when ESS < ess_fraction * N_s
};

struct PFConfig {
    int n_particles = 200;
    double psi_s = 0.0;
    double psi_r = 0.0;
    double sigma2 = 1.0;
    double init_spread = 0.0;
    ResampleMode resample = ResampleMode::Always;
    double ess_fraction = 0.5;

    /// Half-width of the x_a increment: psi_s + psi_r + psi_s * psi_r.
    double azimuth_support() const { return psi_s + psi_r + psi_s * psi_r; }
    double elevation_support() const { return psi_s; }
    void validate() const;
};

/// Uniform prior box of half-width init_spread around x0; weights 1/N_s.
/// Draws x_e then x_a for each particle in index order.
ParticleSet init_particles(const HiddenState& x0, const PFConfig& cfg, SeededRng& rng);

/// Importance-density draw: x_e += U(-psi_s, psi_s), then
/// x_a += U(-(psi_s + psi_r + psi_s psi_r), +(...)). Weight is carried over.
Particle propose(const Particle& p, const PFConfig& cfg, SeededRng& rng);

/// Clamps to the physical box |x| <= 2; returns true when anything moved.
bool clamp_to_bounds(HiddenState& x);

/// -|y - h(x)|^2 / sigma2
double log_likelihood(Complex y, const HiddenState& x, const PhaseShifts& e, const ObservationModel& model,
                      double sigma2);

/// exp(-|y - h(x)|^2 / sigma2), the unnormalized particle weight.
double weight_particle(Complex y, const Particle& p, const PhaseShifts& e, const ObservationModel& model,
                       double sigma2);

/// Rescales raw weights to sum to one. Throws DegenerateWeightsError when no
/// weight is strictly positive and finite.
ParticleSet normalize(ParticleSet ps);

/// Converts log-weights to normalized weights after subtracting the maximum.
/// Throws DegenerateWeightsError when no log-weight is finite.
std::vector<double> normalize_log_weights(std::span<const double> log_weights);

HiddenState estimate(const ParticleSet& ps);

/// Selected source indices for the single-start systematic sweep with a given
/// starting point u1 in [0, 1/N). Strict comparison: u_j advances past c_i
/// only when u_j > c_i. Zero-weight entries are never selected.
std::vector<std::size_t> systematic_indices(std::span<const double> weights, double u1);

/// Draws u1 ~ U(0, 1/N_s) and resamples. Throws std::invalid_argument on
/// weights that do not sum to one.
ParticleSet systematic_resample(const ParticleSet& ps, SeededRng& rng);
ParticleSet systematic_resample(const ParticleSet& ps, double u1);

struct PFStepDiagnostics {
    double ess = 0.0;
    int clamped = 0;
    bool degenerate = false;
    bool resampled = false;
};

struct PFStepResult {
    ParticleSet particles;
    HiddenState estimate;
    PFStepDiagnostics diag;
};

/// One recursion: propose -> weight -> normalize -> estimate -> resample.
/// The estimate uses the same-slot normalized weights, before resampling.
/// With reset_on_degenerate the weights fall back to uniform and the event is
/// flagged; otherwise DegenerateWeightsError propagates.
PFStepResult pf_step(const ParticleSet& ps, Complex y, const PhaseShifts& e, const PFConfig& cfg,
                     const ObservationModel& model, SeededRng& rng, bool reset_on_degenerate = false);

class ParticleFilter {
public:
    ParticleFilter(const PFConfig& cfg, const HiddenState& x0, SeededRng& rng);

    HiddenState step(Complex y, const PhaseShifts& e, const ObservationModel& model, SeededRng& rng);

    const ParticleSet& particles() const { return particles_; }
    const PFConfig& config() const { return cfg_; }
    const PFStepDiagnostics& last() const { return last_; }

private:
    PFConfig cfg_;
    ParticleSet particles_;
    PFStepDiagnostics last_;
};

} // namespace ristrack
