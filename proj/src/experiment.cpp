#include "ristrack/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <variant>

namespace ristrack {

double nmse(const ComplexVec& h_hat, const ComplexVec& h_true)
{
    NmseAccumulator acc;
    acc.add(h_hat, h_true);
    return acc.value();
}

void NmseAccumulator::add(const ComplexVec& h_hat, const ComplexVec& h_true)
{
    if (h_hat.size() != h_true.size())
        throw DimensionError("nmse: length mismatch");
    error += (h_hat - h_true).squaredNorm();
    power += h_true.squaredNorm();
}

NmseAccumulator& NmseAccumulator::operator+=(const NmseAccumulator& o)
{
    error += o.error;
    power += o.power;
    return *this;
}

double NmseAccumulator::value() const
{
    if (!(power > 0.0))
        throw std::domain_error("nmse: true channel has zero power");
    return error / power;
}

double RunResult::nmse_db() const { return 10.0 * std::log10(nmse); }

namespace {

SeededRng stream(std::uint64_t block_seed, Stream s)
{
    return SeededRng(derive_seed(block_seed, static_cast<std::uint64_t>(s)));
}

class Tracker {
public:
    Tracker(const ExperimentConfig& cfg, const TrackerSpec& spec, const HiddenState& x0, SeededRng& rng)
        : impl_(make(cfg, spec, x0, rng))
    {
    }

    HiddenState step(Complex y, const PhaseShifts& e, const ObservationModel& model, SeededRng& rng,
                     SlotRecord& rec)
    {
        if (auto* pf = std::get_if<ParticleFilter>(&impl_)) {
            const HiddenState x = pf->step(y, e, model, rng);
            rec.ess = pf->last().ess;
            rec.clamped = pf->last().clamped;
            rec.degenerate = pf->last().degenerate;
            return x;
        }
        auto& ekf = std::get<ExtendedKalmanFilter>(impl_);
        const HiddenState x = ekf.step(y, e, model);
        rec.innovation = ekf.last().innovation;
        rec.gain_norm = ekf.last().gain_norm;
        return x;
    }

private:
    using Impl = std::variant<ParticleFilter, ExtendedKalmanFilter>;

    static Impl make(const ExperimentConfig& cfg, const TrackerSpec& spec, const HiddenState& x0, SeededRng& rng)
    {
        const double sigma2 = cfg.sigma2();
        if (spec.kind == TrackerSpec::Kind::Ekf)
            return ExtendedKalmanFilter(EkfConfig::from_mobility(cfg.mobility, sigma2, cfg.qu_mode), x0);

        PFConfig pf;
        pf.n_particles = spec.n_particles;
        pf.psi_s = cfg.mobility.psi_s;
        pf.psi_r = cfg.mobility.psi_r;
        // A noiseless link still needs a positive likelihood scale; with the
        // smallest normal double any nonzero residual drives the weight to 0.
        pf.sigma2 = std::max(sigma2, std::numeric_limits<double>::min());
        pf.init_spread = cfg.pf_init_spread;
        pf.resample = cfg.pf_resample;
        pf.ess_fraction = cfg.pf_ess_fraction;
        return ParticleFilter(pf, x0, rng);
    }

    Impl impl_;
};

} // namespace

BlockResult run_block(const ExperimentConfig& cfg, const SweepPoint& point, std::uint64_t block_seed)
{
    SeededRng mobility_rng = stream(block_seed, Stream::Mobility);
    SeededRng noise_rng = stream(block_seed, Stream::Noise);
    SeededRng tracker_rng = stream(block_seed, Stream::Tracker);
    SeededRng phase_rng = stream(block_seed, Stream::Phases);
    SeededRng init_rng = stream(block_seed, Stream::Init);

    Geometry geo = cfg.geometry;
    if (cfg.ue_jitter_m > 0.0) {
        for (int i = 0; i < 3; ++i)
            geo.ue(i) += init_rng.uniform(-cfg.ue_jitter_m, cfg.ue_jitter_m);
    }
    TrueAngles angles = angles_from_geometry(geo);

    const double sigma2 = cfg.sigma2();
    const LinkBudget budget{channel_gain(geo, cfg.array, cfg.path_loss), dbm_to_watts(point.p_tx_dbm), sigma2};
    const ObservationModel model(angles, budget, cfg.array);
    const int l = cfg.array.l;
    const double dl = cfg.array.d_over_lambda;

    HiddenState x_init = cascaded_state(angles);
    if (cfg.init_perturbation_std > 0.0) {
        x_init.x_e += cfg.init_perturbation_std * init_rng.normal();
        x_init.x_a += cfg.init_perturbation_std * init_rng.normal();
    }

    Tracker tracker(cfg, point.tracker, x_init, tracker_rng);
    PhaseShifts e = point.policy == PhasePolicy::Random ? random_phases(l, phase_rng) : beam_match_phases(x_init, l, dl);

    BlockResult out;
    out.slots.reserve(static_cast<std::size_t>(cfg.slots_per_block));
    for (int k = 0; k < cfg.slots_per_block; ++k) {
        angles = step_true_angles(angles, cfg.mobility, mobility_rng);
        SlotRecord rec;
        rec.truth = cascaded_state(angles);
        rec.y = model.mean(rec.truth, e) + noise_rng.cgauss(sigma2);
        rec.estimate = tracker.step(rec.y, e, model, tracker_rng, rec);

        const ComplexVec h_true = channel_matrix(rec.truth, e, angles, cfg.array);
        const ComplexVec h_hat = channel_matrix(rec.estimate, e, angles, cfg.array);
        NmseAccumulator slot;
        slot.add(h_hat, h_true);
        rec.error = slot.error;
        rec.power = slot.power;
        out.nmse += slot;
        out.ess_sum += rec.ess;
        out.clamp_events += rec.clamped;
        out.degenerate_events += rec.degenerate ? 1 : 0;
        out.slots.push_back(rec);

        if (point.policy == PhasePolicy::BeamMatch)
            e = beam_match_phases(rec.estimate, l, dl);
        else if (point.policy == PhasePolicy::Random)
            e = random_phases(l, phase_rng);
    }
    return out;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg)
{
    std::vector<SweepPoint> points;
    for (const auto& t : cfg.trackers)
        for (auto policy : cfg.policies)
            for (double p : cfg.p_tx_dbm)
                points.push_back({t, policy, p});
    return points;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, int threads)
{
    cfg.validate();
    const std::vector<SweepPoint> points = sweep_points(cfg);
    const std::size_t n_blocks = static_cast<std::size_t>(cfg.n_blocks);
    const std::size_t n_units = points.size() * n_blocks;

    struct Unit {
        NmseAccumulator nmse;
        std::vector<NmseAccumulator> per_slot;
        double ess_sum = 0.0;
        long long degenerate = 0;
        long long clamps = 0;
        double seconds = 0.0;
    };
    std::vector<Unit> units(n_units);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (std::size_t i = next++; i < n_units; i = next++) {
            try {
                const auto start = std::chrono::steady_clock::now();
                const SweepPoint& point = points[i / n_blocks];
                const std::uint64_t block_seed = cfg.seed + static_cast<std::uint64_t>(i % n_blocks);
                const BlockResult block = run_block(cfg, point, block_seed);
                Unit& u = units[i];
                u.nmse = block.nmse;
                u.ess_sum = block.ess_sum;
                u.degenerate = block.degenerate_events;
                u.clamps = block.clamp_events;
                if (cfg.record_trajectory) {
                    u.per_slot.resize(block.slots.size());
                    for (std::size_t k = 0; k < block.slots.size(); ++k)
                        u.per_slot[k] = {block.slots[k].error, block.slots[k].power};
                }
                u.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = n_units;
            }
        }
    };

    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(n_units, 1)));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    // Aggregation walks blocks in index order, so the result is independent of scheduling.
    std::vector<RunResult> results;
    results.reserve(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        RunResult r;
        r.point = points[p];
        r.l = cfg.array.l;
        NmseAccumulator total;
        double ess_sum = 0.0;
        if (cfg.record_trajectory)
            r.per_slot.resize(static_cast<std::size_t>(cfg.slots_per_block));
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const Unit& u = units[p * n_blocks + b];
            total += u.nmse;
            r.blocks.push_back(u.nmse);
            ess_sum += u.ess_sum;
            r.degenerate_events += u.degenerate;
            r.clamp_events += u.clamps;
            r.seconds += u.seconds;
            for (std::size_t k = 0; k < u.per_slot.size(); ++k)
                r.per_slot[k] += u.per_slot[k];
        }
        r.nmse = total.value();
        r.ess_mean = ess_sum / static_cast<double>(n_blocks * static_cast<std::size_t>(cfg.slots_per_block));
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace ristrack
