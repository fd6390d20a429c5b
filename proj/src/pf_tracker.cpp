#include "ristrack/pf_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ristrack {

namespace {

constexpr double kNormalizedTol = 1e-9;

std::vector<double> weights_of(const ParticleSet& ps)
{
    std::vector<double> w(ps.size());
    std::transform(ps.particles.begin(), ps.particles.end(), w.begin(), [](const Particle& p) { return p.weight; });
    return w;
}

} // namespace

double ParticleSet::weight_sum() const
{
    double sum = 0.0;
    for (const auto& p : particles)
        sum += p.weight;
    return sum;
}

double ParticleSet::effective_sample_size() const
{
    double sq = 0.0;
    for (const auto& p : particles)
        sq += p.weight * p.weight;
    return sq > 0.0 ? 1.0 / sq : 0.0;
}

void PFConfig::validate() const
{
    if (n_particles < 1)
        throw ConfigError("pf: n_particles must be >= 1");
    if (!(sigma2 > 0.0))
        throw ConfigError("pf: sigma2 must be > 0");
    if (!(psi_s >= 0.0) || !(psi_r >= 0.0))
        throw ConfigError("pf: psi_s and psi_r must be >= 0");
    if (!(init_spread >= 0.0))
        throw ConfigError("pf: init_spread must be >= 0");
    if (!(ess_fraction > 0.0 && ess_fraction <= 1.0))
        throw ConfigError("pf: ess_fraction must be in (0, 1]");
}

ParticleSet init_particles(const HiddenState& x0, const PFConfig& cfg, SeededRng& rng)
{
    ParticleSet ps;
    ps.particles.resize(static_cast<std::size_t>(cfg.n_particles));
    const double w = 1.0 / cfg.n_particles;
    for (auto& p : ps.particles) {
        p.state.x_e = rng.uniform(x0.x_e - cfg.init_spread, x0.x_e + cfg.init_spread);
        p.state.x_a = rng.uniform(x0.x_a - cfg.init_spread, x0.x_a + cfg.init_spread);
        clamp_to_bounds(p.state);
        p.weight = w;
    }
    return ps;
}

Particle propose(const Particle& p, const PFConfig& cfg, SeededRng& rng)
{
    const double se = cfg.elevation_support();
    const double sa = cfg.azimuth_support();
    Particle out = p;
    out.state.x_e += rng.uniform(-se, se);
    out.state.x_a += rng.uniform(-sa, sa);
    return out;
}

bool clamp_to_bounds(HiddenState& x)
{
    const double e = std::clamp(x.x_e, -HiddenState::kBound, HiddenState::kBound);
    const double a = std::clamp(x.x_a, -HiddenState::kBound, HiddenState::kBound);
    const bool moved = e != x.x_e || a != x.x_a;
    x.x_e = e;
    x.x_a = a;
    return moved;
}

double log_likelihood(Complex y, const HiddenState& x, const PhaseShifts& e, const ObservationModel& model,
                      double sigma2)
{
    return -std::norm(y - model.mean(x, e)) / sigma2;
}

double weight_particle(Complex y, const Particle& p, const PhaseShifts& e, const ObservationModel& model,
                       double sigma2)
{
    return std::exp(log_likelihood(y, p.state, e, model, sigma2));
}

ParticleSet normalize(ParticleSet ps)
{
    double total = 0.0;
    for (const auto& p : ps.particles) {
        if (!(p.weight >= 0.0) || !std::isfinite(p.weight))
            throw DegenerateWeightsError("normalize: non-finite or negative weight");
        total += p.weight;
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw DegenerateWeightsError("normalize: all weights are zero");
    for (auto& p : ps.particles)
        p.weight /= total;
    return ps;
}

std::vector<double> normalize_log_weights(std::span<const double> log_weights)
{
    double peak = -std::numeric_limits<double>::infinity();
    for (double lw : log_weights)
        if (std::isfinite(lw))
            peak = std::max(peak, lw);
    if (!std::isfinite(peak))
        throw DegenerateWeightsError("normalize: no finite log-weight");

    std::vector<double> w(log_weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        // NaN and -inf both map to zero weight.
        w[i] = std::isnan(log_weights[i]) ? 0.0 : std::exp(log_weights[i] - peak);
        total += w[i];
    }
    for (double& v : w)
        v /= total;
    return w;
}

HiddenState estimate(const ParticleSet& ps)
{
    HiddenState out{0.0, 0.0};
    for (const auto& p : ps.particles) {
        out.x_e += p.weight * p.state.x_e;
        out.x_a += p.weight * p.state.x_a;
    }
    return out;
}

std::vector<std::size_t> systematic_indices(std::span<const double> weights, double u1)
{
    const std::size_t n = weights.size();
    if (n == 0)
        throw std::invalid_argument("resample: empty particle set");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > kNormalizedTol)
        throw std::invalid_argument("resample: weights are not normalized (sum = " + std::to_string(total) + ")");

    std::vector<double> cdf(n);
    std::partial_sum(weights.begin(), weights.end(), cdf.begin());

    std::vector<std::size_t> picks(n);
    const double step = 1.0 / static_cast<double>(n);
    std::size_t i = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double u = u1 + step * static_cast<double>(j);
        // Zero-weight entries are skipped so a tie at their (flat) CDF value
        // cannot select them; the last entry can fall short of 1 by rounding.
        while (i + 1 < n && (u > cdf[i] || weights[i] <= 0.0))
            ++i;
        picks[j] = i;
    }
    return picks;
}

ParticleSet systematic_resample(const ParticleSet& ps, double u1)
{
    const std::vector<double> w = weights_of(ps);
    const std::vector<std::size_t> picks = systematic_indices(w, u1);
    ParticleSet out;
    out.particles.resize(ps.size());
    const double uniform = 1.0 / static_cast<double>(ps.size());
    for (std::size_t j = 0; j < picks.size(); ++j)
        out.particles[j] = {ps.particles[picks[j]].state, uniform};
    return out;
}

ParticleSet systematic_resample(const ParticleSet& ps, SeededRng& rng)
{
    return systematic_resample(ps, rng.uniform(0.0, 1.0 / static_cast<double>(ps.size())));
}

PFStepResult pf_step(const ParticleSet& ps, Complex y, const PhaseShifts& e, const PFConfig& cfg,
                     const ObservationModel& model, SeededRng& rng, bool reset_on_degenerate)
{
    PFStepResult result;
    auto& next = result.particles.particles;
    next.reserve(ps.size());

    // All proposal draws happen in index order before any weighting.
    for (const auto& p : ps.particles) {
        Particle q = propose(p, cfg, rng);
        if (clamp_to_bounds(q.state))
            ++result.diag.clamped;
        next.push_back(q);
    }

    std::vector<double> log_w(next.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
        const double prior = next[i].weight;
        log_w[i] = (prior > 0.0 ? std::log(prior) : -std::numeric_limits<double>::infinity()) +
                   log_likelihood(y, next[i].state, e, model, cfg.sigma2);
    }

    try {
        const std::vector<double> w = normalize_log_weights(log_w);
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i].weight = w[i];
    } catch (const DegenerateWeightsError&) {
        if (!reset_on_degenerate)
            throw;
        result.diag.degenerate = true;
        for (auto& p : next)
            p.weight = 1.0 / static_cast<double>(next.size());
    }

    result.estimate = estimate(result.particles);
    result.diag.ess = result.particles.effective_sample_size();

    const bool resample = cfg.resample == ResampleMode::Always ||
                          result.diag.ess < cfg.ess_fraction * static_cast<double>(next.size());
    if (resample) {
        result.particles = systematic_resample(result.particles, rng);
        result.diag.resampled = true;
    }
    return result;
}

namespace {
const PFConfig& validated(const PFConfig& cfg)
{
    cfg.validate();
    return cfg;
}
} // namespace

ParticleFilter::ParticleFilter(const PFConfig& cfg, const HiddenState& x0, SeededRng& rng)
    : cfg_(validated(cfg)), particles_(init_particles(x0, cfg, rng))
{
}

HiddenState ParticleFilter::step(Complex y, const PhaseShifts& e, const ObservationModel& model, SeededRng& rng)
{
    PFStepResult r = pf_step(particles_, y, e, cfg_, model, rng, true);
    particles_ = std::move(r.particles);
    last_ = r.diag;
    return r.estimate;
}

} // namespace ristrack
