// ristrack: RIS cascaded-angle channel tracking experiments.
//
//   ristrack run <config> [--out dir] [--seed n] [--blocks n] [--threads n]
//   ristrack validate <config>
//   ristrack propcheck [--samples n] [--seed n]
//   ristrack fixtures [--out dir]
//
// Exit status: 0 success, 1 usage or configuration error, 2 runtime error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ristrack/config.hpp"
#include "ristrack/experiment.hpp"
#include "ristrack/fixtures.hpp"
#include "ristrack/propcheck.hpp"
#include "ristrack/report.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::optional<std::uint64_t> env_seed()
{
    const char* v = std::getenv("RIS_TRACK_SEED");
    if (!v || !*v)
        return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long long s = std::stoull(v, &used);
        if (used != std::string(v).size())
            throw std::invalid_argument(v);
        return s;
    } catch (const std::exception&) {
        throw ristrack::ConfigError("RIS_TRACK_SEED is not an unsigned integer: '" + std::string(v) + "'");
    }
}

void warn_mobility(const ristrack::ExperimentConfig& cfg)
{
    if (!cfg.mobility.small_angle_regime())
        std::cerr << "warning: per-slot angle steps above 5 degrees; the uniform proposal supports are a "
                     "small-angle approximation\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"RIS cascaded-angle channel tracking: PF and EKF trackers, NMSE sweeps"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> blocks;
    int threads = 1;

    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--seed", seed, "base seed (overrides config and RIS_TRACK_SEED)");
    run->add_option("--blocks", blocks, "number of blocks (overrides config)")->check(CLI::PositiveNumber);
    run->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();

    auto* validate = app.add_subcommand("validate", "check a config file against the schema");
    validate->add_option("config", config_path, "config file")->required();

    long long samples = 1'000'000;
    std::uint64_t prop_seed = 1;
    auto* propcheck = app.add_subcommand("propcheck", "check proposal supports against exact increments");
    propcheck->add_option("--samples", samples, "increments per setting")->capture_default_str();
    propcheck->add_option("--seed", prop_seed, "seed")->capture_default_str();

    auto* fixtures = app.add_subcommand("fixtures", "regenerate oracle fixtures");
    fixtures->add_option("--out", out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    ristrack::ExperimentConfig cfg;
    if (*run || *validate) {
        try {
            cfg = ristrack::load_config(config_path);
            if (auto s = env_seed())
                cfg.seed = *s;
            if (seed)
                cfg.seed = *seed;
            if (blocks)
                cfg.n_blocks = *blocks;
            cfg.validate();
        } catch (const ristrack::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kConfigError;
        }
        warn_mobility(cfg);
    }

    try {
        if (*validate) {
            std::cout << config_path << ": ok (" << ristrack::sweep_points(cfg).size() << " sweep points, "
                      << cfg.n_blocks << " blocks x " << cfg.slots_per_block << " slots)\n";
            return kOk;
        }
        if (*run) {
            const auto results = ristrack::run_experiment(cfg, threads);
            const std::filesystem::path out(out_dir);
            ristrack::emit_csv(results, out / "results.csv");
            ristrack::emit_plot_script(results, out / "plot.gp", "results.csv");
            if (cfg.record_trajectory)
                ristrack::emit_trajectory_csv(results, out / "trajectory.csv");
            std::cout << "blocks=" << cfg.n_blocks << " slots=" << cfg.slots_per_block << " seed=" << cfg.seed
                      << "\n";
            for (const auto& r : results) {
                std::cout << r.point.tracker.label() << " " << ristrack::to_string(r.point.policy)
                          << " pTX=" << r.point.p_tx_dbm << " dBm  NMSE=" << r.nmse << " (" << r.nmse_db()
                          << " dB)\n";
            }
            std::cout << "wrote " << (out / "results.csv").string() << " and " << (out / "plot.gp").string() << "\n";
            return kOk;
        }
        if (*propcheck) {
            for (double deg : {0.5, 2.0}) {
                const double rad = ristrack::deg_to_rad(deg);
                std::cout << ristrack::format_propcheck(ristrack::run_propcheck(rad, rad, samples, prop_seed));
            }
            return kOk;
        }
        if (*fixtures) {
            const std::filesystem::path path = std::filesystem::path(out_dir) / "fixtures.json";
            ristrack::write_fixtures(path);
            std::cout << "wrote " << path.string() << "\n";
            return kOk;
        }
    } catch (const ristrack::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kOk;
}
