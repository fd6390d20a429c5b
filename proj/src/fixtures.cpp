#include "ristrack/fixtures.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "ristrack/experiment.hpp"
#include "ristrack/pf_tracker.hpp"

namespace ristrack {

ExperimentConfig frozen_ekf_scenario()
{
    ExperimentConfig cfg;
    cfg.array.l = 4;
    cfg.p_tx_dbm = {30.0};
    cfg.trackers = {{TrackerSpec::Kind::Ekf, 0}};
    cfg.policies = {PhasePolicy::BeamMatch};
    cfg.slots_per_block = 10;
    cfg.n_blocks = 1;
    cfg.seed = kFrozenEkfSeed;
    return cfg;
}

std::string fixtures_json()
{
    using nlohmann::json;
    json out;

    const Geometry geo;
    const ArrayConfig array;
    const TrueAngles a = angles_from_geometry(geo);
    const HiddenState x = cascaded_state(a);
    out["geometry"] = {{"bs", {geo.bs.x(), geo.bs.y(), geo.bs.z()}},
                       {"ris", {geo.ris.x(), geo.ris.y(), geo.ris.z()}},
                       {"ue", {geo.ue.x(), geo.ue.y(), geo.ue.z()}},
                       {"theta", a.theta},
                       {"phi_e", a.phi_e},
                       {"phi_a", a.phi_a},
                       {"psi_e", a.psi_e},
                       {"psi_a", a.psi_a},
                       {"x_e", x.x_e},
                       {"x_a", x.x_a}};
    out["channel_gain"] = {{"carrier_hz", array.carrier_hz}, {"abs_alpha", std::abs(channel_gain(geo, array))}};

    const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
    const auto picks = systematic_indices(w, 0.1);
    std::vector<int> mult(w.size(), 0);
    for (auto i : picks)
        ++mult[i];
    out["resample"] = {{"weights", w}, {"u1", 0.1}, {"indices", picks}, {"multiplicities", mult}};

    const ExperimentConfig cfg = frozen_ekf_scenario();
    const BlockResult block = run_block(cfg, sweep_points(cfg).front(), cfg.seed);
    json traj = json::array();
    for (const auto& s : block.slots)
        traj.push_back({{"truth", {s.truth.x_e, s.truth.x_a}}, {"estimate", {s.estimate.x_e, s.estimate.x_a}}});
    out["ekf_trajectory"] = {{"seed", cfg.seed}, {"slots", traj}};

    return out.dump(2) + "\n";
}

void write_fixtures(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    f << fixtures_json();
}

} // namespace ristrack
