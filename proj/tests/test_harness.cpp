#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ristrack/experiment.hpp"
#include "ristrack/fixtures.hpp"
#include "ristrack/propcheck.hpp"
#include "ristrack/report.hpp"
#include "ristrack/stats.hpp"

using namespace ristrack;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.array.l = 4;
    cfg.p_tx_dbm = {10.0, 30.0};
    cfg.trackers = {{TrackerSpec::Kind::Ekf, 0}, {TrackerSpec::Kind::Pf, 20}};
    cfg.policies = {PhasePolicy::BeamMatch, PhasePolicy::Random};
    cfg.slots_per_block = 15;
    cfg.n_blocks = 4;
    cfg.seed = 11;
    return cfg;
}

ExperimentConfig static_noiseless()
{
    ExperimentConfig cfg;
    cfg.mobility = {0.0, 0.0};
    cfg.noise_dbm = -std::numeric_limits<double>::infinity();
    cfg.p_tx_dbm = {20.0};
    cfg.trackers = {{TrackerSpec::Kind::Ekf, 0}, {TrackerSpec::Kind::Pf, 50}};
    cfg.slots_per_block = 100;
    cfg.n_blocks = 1;
    return cfg;
}

std::string csv_without_seconds(const std::vector<RunResult>& results)
{
    std::vector<RunResult> copy = results;
    for (auto& r : copy)
        r.seconds = 0.0;
    return format_csv(copy);
}

ComplexVec vec2(Complex a, Complex b)
{
    ComplexVec v(2);
    v << a, b;
    return v;
}

} // namespace

TEST(Nmse, Cases)
{
    const ComplexVec h = vec2({1.0, 2.0}, {-0.5, 0.3});
    EXPECT_EQ(nmse(h, h), 0.0);
    EXPECT_EQ(nmse(ComplexVec::Zero(2), h), 1.0);
    EXPECT_DOUBLE_EQ(nmse(2.0 * h, h), 1.0);
    EXPECT_THROW(nmse(h, ComplexVec::Zero(2)), std::domain_error);
    EXPECT_THROW(nmse(h, ComplexVec::Zero(3)), DimensionError);
}

TEST(Nmse, RatioOfSums)
{
    NmseAccumulator acc;
    acc.add(vec2(1.0, 0.0), vec2(2.0, 0.0));  // error 1, power 4
    acc.add(vec2(0.0, 0.0), vec2(1.0, 0.0));  // error 1, power 1
    EXPECT_DOUBLE_EQ(acc.value(), 2.0 / 5.0);
}

TEST(RunBlock, StaticNoiselessIsExact)
{
    const ExperimentConfig cfg = static_noiseless();
    for (const auto& point : sweep_points(cfg)) {
        const BlockResult block = run_block(cfg, point, 3);
        ASSERT_EQ(block.slots.size(), 100u);
        for (const auto& s : block.slots)
            ASSERT_LT(s.error / s.power, 1e-10) << point.tracker.label();
        EXPECT_EQ(block.degenerate_events, 0);
    }
}

TEST(RunBlock, Deterministic)
{
    const ExperimentConfig cfg = small_config();
    for (const auto& point : sweep_points(cfg)) {
        const BlockResult a = run_block(cfg, point, 99);
        const BlockResult b = run_block(cfg, point, 99);
        EXPECT_EQ(a.slots, b.slots);
    }
}

TEST(RunBlock, SharedStreamsAcrossTrackers)
{
    const ExperimentConfig cfg = small_config();
    const BlockResult ekf = run_block(cfg, {{TrackerSpec::Kind::Ekf, 0}, PhasePolicy::BeamMatch, 10.0}, 5);
    const BlockResult pf = run_block(cfg, {{TrackerSpec::Kind::Pf, 20}, PhasePolicy::BeamMatch, 30.0}, 5);
    for (std::size_t k = 0; k < ekf.slots.size(); ++k)
        EXPECT_EQ(ekf.slots[k].truth, pf.slots[k].truth);
}

TEST(RunBlock, HandTracedFiveSlots)
{
    ExperimentConfig cfg;
    cfg.array.l = 4;
    cfg.slots_per_block = 5;
    const SweepPoint point{{TrackerSpec::Kind::Pf, 3}, PhasePolicy::BeamMatch, 25.0};
    const std::uint64_t seed = 17;
    const BlockResult block = run_block(cfg, point, seed);

    // Trace with the documented stream layout and the library's primitives.
    SeededRng mob(derive_seed(seed, 1));
    SeededRng noise(derive_seed(seed, 2));
    SeededRng trk(derive_seed(seed, 3));
    TrueAngles a = angles_from_geometry(cfg.geometry);
    const LinkBudget budget{channel_gain(cfg.geometry, cfg.array), dbm_to_watts(25.0), cfg.sigma2()};
    const ObservationModel model(a, budget, cfg.array);
    PFConfig pf;
    pf.n_particles = 3;
    pf.psi_s = cfg.mobility.psi_s;
    pf.psi_r = cfg.mobility.psi_r;
    pf.sigma2 = cfg.sigma2();
    const HiddenState x0 = cascaded_state(a);
    ParticleSet ps = init_particles(x0, pf, trk);
    PhaseShifts e = beam_match_phases(x0, 4, 0.5);
    ASSERT_EQ(block.slots.size(), 5u);
    for (int k = 0; k < 5; ++k) {
        a = step_true_angles(a, cfg.mobility, mob);
        const HiddenState truth = cascaded_state(a);
        const Complex y = model.mean(truth, e) + noise.cgauss(cfg.sigma2());
        PFStepResult r = pf_step(ps, y, e, pf, model, trk, true);
        ps = r.particles;
        const ComplexVec h = channel_matrix(truth, e, a, cfg.array);
        const ComplexVec h_hat = channel_matrix(r.estimate, e, a, cfg.array);

        const SlotRecord& rec = block.slots[static_cast<std::size_t>(k)];
        EXPECT_EQ(rec.truth, truth);
        EXPECT_EQ(rec.y, y);
        EXPECT_EQ(rec.estimate, r.estimate);
        EXPECT_EQ(rec.error, (h_hat - h).squaredNorm());
        EXPECT_EQ(rec.power, h.squaredNorm());
        EXPECT_EQ(rec.ess, r.diag.ess);
        e = beam_match_phases(r.estimate, 4, 0.5);
    }
}

TEST(RunBlock, FixedPolicyHoldsPhases)
{
    ExperimentConfig cfg = small_config();
    cfg.mobility = {0.0, 0.0};
    cfg.noise_dbm = -std::numeric_limits<double>::infinity();
    // With no motion and no noise the observation only changes if e changes.
    const BlockResult block = run_block(cfg, {{TrackerSpec::Kind::Ekf, 0}, PhasePolicy::Fixed, 20.0}, 1);
    for (const auto& s : block.slots)
        EXPECT_EQ(s.y, block.slots.front().y);
}

TEST(RunExperiment, SinglePointEqualsBlockAggregate)
{
    ExperimentConfig cfg = small_config();
    cfg.trackers = {{TrackerSpec::Kind::Pf, 20}};
    cfg.policies = {PhasePolicy::BeamMatch};
    cfg.p_tx_dbm = {20.0};
    const auto results = run_experiment(cfg);
    ASSERT_EQ(results.size(), 1u);
    NmseAccumulator acc;
    for (int b = 0; b < cfg.n_blocks; ++b)
        acc += run_block(cfg, sweep_points(cfg).front(), cfg.seed + static_cast<std::uint64_t>(b)).nmse;
    EXPECT_EQ(results[0].nmse, acc.value());
}

TEST(RunExperiment, BlockRangesAreAdditive)
{
    ExperimentConfig cfg = small_config();
    cfg.n_blocks = 6;
    const auto whole = run_experiment(cfg);
    ExperimentConfig first = cfg;
    first.n_blocks = 2;
    ExperimentConfig second = cfg;
    second.n_blocks = 4;
    second.seed = cfg.seed + 2;
    const auto a = run_experiment(first);
    const auto b = run_experiment(second);
    for (std::size_t p = 0; p < whole.size(); ++p) {
        NmseAccumulator ta;
        NmseAccumulator tb;
        for (const auto& x : a[p].blocks)
            ta += x;
        for (const auto& x : b[p].blocks)
            tb += x;
        const double combined = (ta.error + tb.error) / (ta.power + tb.power);
        EXPECT_NEAR(whole[p].nmse, combined, 1e-15 * combined);
    }
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults)
{
    ExperimentConfig cfg = small_config();
    cfg.record_trajectory = true;
    const auto one = run_experiment(cfg, 1);
    const auto three = run_experiment(cfg, 3);
    EXPECT_EQ(csv_without_seconds(one), csv_without_seconds(three));
    for (std::size_t p = 0; p < one.size(); ++p)
        for (std::size_t k = 0; k < one[p].per_slot.size(); ++k)
            EXPECT_EQ(one[p].per_slot[k].value(), three[p].per_slot[k].value());
}

TEST(RunExperiment, SweepOrder)
{
    const auto points = sweep_points(small_config());
    ASSERT_EQ(points.size(), 8u);
    EXPECT_EQ(points[0].tracker.label(), "EKF");
    EXPECT_EQ(points[0].policy, PhasePolicy::BeamMatch);
    EXPECT_EQ(points[1].p_tx_dbm, 30.0);
    EXPECT_EQ(points[2].policy, PhasePolicy::Random);
    EXPECT_EQ(points[4].tracker.label(), "PF-20");
}

TEST(RunExperiment, SmokeRunWithinBudget)
{
    ExperimentConfig cfg;
    cfg.array.l = 8;
    cfg.p_tx_dbm = {20.0};
    cfg.trackers = {{TrackerSpec::Kind::Pf, 50}};
    cfg.n_blocks = 10;
    cfg.slots_per_block = 100;
    const auto start = std::chrono::steady_clock::now();
    const auto results = run_experiment(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(seconds, 60.0);
    ASSERT_EQ(results.size(), 1u);
    EXPECT_GT(results[0].nmse, 0.0);
    EXPECT_EQ(parse_csv(format_csv(results)).size(), 1u);
}

TEST(Csv, EmptyResultsGiveHeaderOnly)
{
    EXPECT_EQ(format_csv({}),
              "tracker,n_particles,phase_policy,p_tx_dbm,L,nmse,nmse_db,ess_mean,degenerate_events,clamp_events,"
              "seconds\n");
    EXPECT_TRUE(parse_csv(format_csv({})).empty());
}

TEST(Csv, RoundTripIsExact)
{
    const auto results = run_experiment(small_config());
    const std::filesystem::path path = std::filesystem::temp_directory_path() / "ristrack_roundtrip.csv";
    emit_csv(results, path);
    const auto rows = read_csv(path);
    std::filesystem::remove(path);
    ASSERT_EQ(rows.size(), results.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].at("tracker"), results[i].point.tracker.name());
        EXPECT_EQ(std::stoi(rows[i].at("n_particles")), results[i].point.tracker.n_particles);
        EXPECT_EQ(rows[i].at("phase_policy"), to_string(results[i].point.policy));
        EXPECT_EQ(std::stod(rows[i].at("p_tx_dbm")), results[i].point.p_tx_dbm);
        EXPECT_EQ(std::stoi(rows[i].at("L")), 4);
        EXPECT_EQ(std::stod(rows[i].at("nmse")), results[i].nmse);
        EXPECT_EQ(std::stod(rows[i].at("nmse_db")), results[i].nmse_db());
        EXPECT_EQ(std::stod(rows[i].at("ess_mean")), results[i].ess_mean);
        EXPECT_EQ(std::stod(rows[i].at("seconds")), results[i].seconds);
    }
}

TEST(Csv, ColumnOrderAndLineEndings)
{
    const std::string text = format_csv(run_experiment(small_config()));
    EXPECT_EQ(text.find('\r'), std::string::npos);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "tracker,n_particles,phase_policy,p_tx_dbm,L,nmse,nmse_db,ess_mean,degenerate_events,clamp_events,seconds");
    EXPECT_EQ(text.back(), '\n');
}

TEST(Csv, QuotingFollowsRfc4180)
{
    const auto rows = parse_csv("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].at("a"), "x,1");
    EXPECT_EQ(rows[0].at("b"), "say \"hi\"");
    EXPECT_THROW(parse_csv("a,b\n1\n"), std::runtime_error);
    EXPECT_THROW(parse_csv("a\n\"open\n"), std::runtime_error);
}

TEST(Csv, UnwritablePathNamesThePath)
{
    try {
        emit_csv({}, "/proc/ristrack-no-such-dir/results.csv");
        FAIL() << "expected an I/O error";
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("ristrack-no-such-dir"), std::string::npos);
    }
}

TEST(PlotScript, OneCurvePerTrackerForDefaultSweep)
{
    ExperimentConfig cfg;
    cfg.array.l = 2;
    cfg.p_tx_dbm = {0.0, 20.0};
    cfg.slots_per_block = 2;
    cfg.n_blocks = 1;
    const std::string script = format_plot_script(run_experiment(cfg), "results.csv");
    std::size_t curves = 0;
    for (std::size_t pos = script.find("with linespoints"); pos != std::string::npos;
         pos = script.find("with linespoints", pos + 1))
        ++curves;
    EXPECT_EQ(curves, 3u);
    EXPECT_NE(script.find("title 'EKF'"), std::string::npos);
    EXPECT_NE(script.find("title 'PF-50'"), std::string::npos);
    EXPECT_NE(script.find("title 'PF-200'"), std::string::npos);
    EXPECT_NE(script.find("set logscale y"), std::string::npos);
    EXPECT_NE(script.find("csv = 'results.csv'"), std::string::npos);
    EXPECT_EQ(script.find('/'), script.find("1/0") + 1);
}

TEST(PlotScript, PolicyBreaksOutCurves)
{
    ExperimentConfig cfg = small_config();
    cfg.slots_per_block = 2;
    cfg.n_blocks = 1;
    const std::string script = format_plot_script(run_experiment(cfg), "r.csv");
    EXPECT_NE(script.find("title 'PF-20 (random)'"), std::string::npos);
    EXPECT_NE(script.find("title 'EKF (beam_match)'"), std::string::npos);
}

TEST(Config, ParsesEveryKey)
{
    std::istringstream in(R"(# comment
geometry.bs = 1 2 3
geometry.ris = 0 0 10
geometry.ue = 5 5 0
array.n_rx = 8
array.l = 6
array.d_over_lambda = 0.5
array.carrier_hz = 3e10
mobility.psi_s_deg = 1.0
mobility.psi_r_deg = 2.0
pathloss.ref_distance_m = 1
pathloss.exponent = 2.5
link.p_tx_dbm = 0 20 40
link.noise_dbm = -inf
trackers = ekf pf:10
ekf.qu_mode = unsquared
pf.init_spread = 0.01
pf.resample = ess
pf.ess_fraction = 0.4
phase.policies = fixed random
run.slots_per_block = 7
run.n_blocks = 3
run.seed = 18446744073709551615
run.init_perturbation_std = 0.001
run.ue_jitter_m = 0.5
run.record_trajectory = true
)");
    const ExperimentConfig c = parse_config(in);
    EXPECT_EQ(c.geometry.bs, Vec3(1, 2, 3));
    EXPECT_EQ(c.array.l, 6);
    EXPECT_NEAR(c.mobility.psi_r, deg_to_rad(2.0), 1e-16);
    EXPECT_EQ(c.p_tx_dbm, (std::vector<double>{0, 20, 40}));
    EXPECT_EQ(c.sigma2(), 0.0);
    ASSERT_EQ(c.trackers.size(), 2u);
    EXPECT_EQ(c.trackers[1].n_particles, 10);
    EXPECT_EQ(c.qu_mode, ProcessNoiseMode::Unsquared);
    EXPECT_EQ(c.pf_resample, ResampleMode::EssThreshold);
    EXPECT_EQ(c.policies, (std::vector<PhasePolicy>{PhasePolicy::Fixed, PhasePolicy::Random}));
    EXPECT_EQ(c.seed, 18446744073709551615ULL);
    EXPECT_TRUE(c.record_trajectory);
}

TEST(Config, ErrorsCarryLineNumbers)
{
    const auto error_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            parse_config(in, "t.conf");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(error_of("array.l = 4\nbogus = 1\n").find("t.conf:2"), std::string::npos);
    EXPECT_NE(error_of("array.l = 4\narray.l = 5\n").find("duplicate"), std::string::npos);
    EXPECT_NE(error_of("array.l = four\n").find("t.conf:1"), std::string::npos);
    EXPECT_NE(error_of("trackers = kalman\n").find("unknown tracker"), std::string::npos);
    EXPECT_NE(error_of("run.n_blocks = 0\n"), "");
    EXPECT_NE(error_of("phase.policies = best\n"), "");
    EXPECT_NE(error_of("array.l\n"), "");
    EXPECT_THROW(load_config("/nonexistent/ristrack.conf"), ConfigError);
}

TEST(Config, WriteThenParseRoundTrips)
{
    ExperimentConfig c = small_config();
    c.noise_dbm = -80.5;
    c.pf_resample = ResampleMode::EssThreshold;
    std::istringstream in(write_config(c));
    const ExperimentConfig back = parse_config(in);
    EXPECT_EQ(write_config(back), write_config(c));
    EXPECT_EQ(back.trackers, c.trackers);
    EXPECT_EQ(back.p_tx_dbm, c.p_tx_dbm);
    EXPECT_NEAR(back.mobility.psi_s, c.mobility.psi_s, 1e-18);
}

TEST(Config, DefaultNoiseFloor)
{
    // -174 dBm/Hz over 100 MHz with a 10 dB noise figure.
    const ExperimentConfig c;
    EXPECT_EQ(c.noise_dbm, -84.0);
    EXPECT_NEAR(c.sigma2(), std::pow(10.0, -11.4), 1e-25);
}

TEST(Propcheck, SmallStepsAreCovered)
{
    const PropcheckReport r = run_propcheck(deg_to_rad(0.5), deg_to_rad(0.5), 100'000, 1);
    EXPECT_GE(r.coverage_joint, 0.999);
    EXPECT_LE(r.max_ratio_e, 1.0 + 1e-9);
    EXPECT_LE(r.max_ratio_a, 1.0 + 1e-9);
    EXPECT_NE(format_propcheck(r).find("coverage"), std::string::npos);
}

TEST(Bootstrap, DetectsClearOrdering)
{
    std::vector<NmseAccumulator> a;
    std::vector<NmseAccumulator> b;
    SeededRng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double p = rng.uniform(1, 2);
        a.push_back({0.1 * p, p});
        b.push_back({0.2 * p, p});
    }
    EXPECT_TRUE(nmse_le_confident(a, b));
    EXPECT_FALSE(nmse_le_confident(b, a));
    EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(quantile({1, 2}, 0.25), 1.25);
}

TEST(Fixtures, CheckedInFileMatchesRegeneration)
{
    std::ifstream in(std::string(RISTRACK_TEST_DATA) + "/fixtures.json");
    ASSERT_TRUE(in.good());
    const nlohmann::json stored = nlohmann::json::parse(in);
    const nlohmann::json fresh = nlohmann::json::parse(fixtures_json());
    EXPECT_EQ(stored.at("resample").at("multiplicities"), (std::vector<int>{1, 0, 2, 1}));
    EXPECT_EQ(stored.at("resample"), fresh.at("resample"));
    for (const char* key : {"theta", "phi_e", "phi_a", "psi_e", "psi_a", "x_e", "x_a"})
        EXPECT_NEAR(stored["geometry"][key].get<double>(), fresh["geometry"][key].get<double>(), 1e-14) << key;
    EXPECT_NEAR(stored["channel_gain"]["abs_alpha"].get<double>(), 2.710655556893485e-07, 1e-20);
}
