#include "ristrack/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <map>
#include <set>
#include <sstream>

namespace ristrack {

namespace {

using Tokens = std::vector<std::string>;

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Tokens split_ws(const std::string& s)
{
    Tokens out;
    std::istringstream in(s);
    for (std::string t; in >> t;)
        out.push_back(t);
    return out;
}

double to_real(const std::string& t)
{
    // strtod accepts "inf"/"-inf", which noise_dbm uses for a noiseless link.
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || std::isnan(v))
        throw ConfigError("expected a real number, got '" + t + "'");
    return v;
}

long long to_int(const std::string& t)
{
    long long v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError("expected an integer, got '" + t + "'");
    return v;
}

std::uint64_t to_u64(const std::string& t)
{
    std::uint64_t v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError("expected an unsigned 64-bit integer, got '" + t + "'");
    return v;
}

bool to_bool(const std::string& t)
{
    if (t == "true" || t == "1")
        return true;
    if (t == "false" || t == "0")
        return false;
    throw ConfigError("expected true/false, got '" + t + "'");
}

void want_count(const Tokens& t, std::size_t n)
{
    if (t.size() != n)
        throw ConfigError("expected " + std::to_string(n) + " value(s), got " + std::to_string(t.size()));
}

double one_real(const Tokens& t)
{
    want_count(t, 1);
    return to_real(t[0]);
}

int one_int(const Tokens& t)
{
    want_count(t, 1);
    const long long v = to_int(t[0]);
    if (v < INT32_MIN || v > INT32_MAX)
        throw ConfigError("integer out of range: " + t[0]);
    return static_cast<int>(v);
}

Vec3 vec3(const Tokens& t)
{
    want_count(t, 3);
    return {to_real(t[0]), to_real(t[1]), to_real(t[2])};
}

TrackerSpec parse_tracker(const std::string& t)
{
    if (t == "ekf")
        return {TrackerSpec::Kind::Ekf, 0};
    if (t.rfind("pf:", 0) == 0) {
        const long long n = to_int(t.substr(3));
        if (n < 1 || n > 10'000'000)
            throw ConfigError("particle count out of range in '" + t + "'");
        return {TrackerSpec::Kind::Pf, static_cast<int>(n)};
    }
    throw ConfigError("unknown tracker '" + t + "' (expected ekf or pf:<N>)");
}

std::string fmt_real(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

using Handler = std::function<void(ExperimentConfig&, const Tokens&)>;

const std::map<std::string, Handler>& handlers()
{
    static const std::map<std::string, Handler> table = {
        {"geometry.bs", [](ExperimentConfig& c, const Tokens& t) { c.geometry.bs = vec3(t); }},
        {"geometry.ris", [](ExperimentConfig& c, const Tokens& t) { c.geometry.ris = vec3(t); }},
        {"geometry.ue", [](ExperimentConfig& c, const Tokens& t) { c.geometry.ue = vec3(t); }},
        {"array.n_rx", [](ExperimentConfig& c, const Tokens& t) { c.array.n_rx = one_int(t); }},
        {"array.l", [](ExperimentConfig& c, const Tokens& t) { c.array.l = one_int(t); }},
        {"array.d_over_lambda", [](ExperimentConfig& c, const Tokens& t) { c.array.d_over_lambda = one_real(t); }},
        {"array.carrier_hz", [](ExperimentConfig& c, const Tokens& t) { c.array.carrier_hz = one_real(t); }},
        {"mobility.psi_s_deg",
         [](ExperimentConfig& c, const Tokens& t) { c.mobility.psi_s = deg_to_rad(one_real(t)); }},
        {"mobility.psi_r_deg",
         [](ExperimentConfig& c, const Tokens& t) { c.mobility.psi_r = deg_to_rad(one_real(t)); }},
        {"pathloss.ref_distance_m",
         [](ExperimentConfig& c, const Tokens& t) { c.path_loss.ref_distance_m = one_real(t); }},
        {"pathloss.exponent", [](ExperimentConfig& c, const Tokens& t) { c.path_loss.exponent = one_real(t); }},
        {"link.p_tx_dbm",
         [](ExperimentConfig& c, const Tokens& t) {
             c.p_tx_dbm.clear();
             for (const auto& v : t)
                 c.p_tx_dbm.push_back(to_real(v));
         }},
        {"link.noise_dbm", [](ExperimentConfig& c, const Tokens& t) { c.noise_dbm = one_real(t); }},
        {"trackers",
         [](ExperimentConfig& c, const Tokens& t) {
             c.trackers.clear();
             for (const auto& v : t)
                 c.trackers.push_back(parse_tracker(v));
         }},
        {"ekf.qu_mode",
         [](ExperimentConfig& c, const Tokens& t) {
             want_count(t, 1);
             if (t[0] == "uniform_variance")
                 c.qu_mode = ProcessNoiseMode::UniformVariance;
             else if (t[0] == "unsquared")
                 c.qu_mode = ProcessNoiseMode::Unsquared;
             else
                 throw ConfigError("unknown qu_mode '" + t[0] + "' (expected uniform_variance or unsquared)");
         }},
        {"pf.init_spread", [](ExperimentConfig& c, const Tokens& t) { c.pf_init_spread = one_real(t); }},
        {"pf.resample",
         [](ExperimentConfig& c, const Tokens& t) {
             want_count(t, 1);
             if (t[0] == "always")
                 c.pf_resample = ResampleMode::Always;
             else if (t[0] == "ess")
                 c.pf_resample = ResampleMode::EssThreshold;
             else
                 throw ConfigError("unknown resample mode '" + t[0] + "' (expected always or ess)");
         }},
        {"pf.ess_fraction", [](ExperimentConfig& c, const Tokens& t) { c.pf_ess_fraction = one_real(t); }},
        {"phase.policies",
         [](ExperimentConfig& c, const Tokens& t) {
             c.policies.clear();
             for (const auto& v : t)
                 c.policies.push_back(parse_phase_policy(v));
         }},
        {"run.slots_per_block", [](ExperimentConfig& c, const Tokens& t) { c.slots_per_block = one_int(t); }},
        {"run.n_blocks", [](ExperimentConfig& c, const Tokens& t) { c.n_blocks = one_int(t); }},
        {"run.seed",
         [](ExperimentConfig& c, const Tokens& t) {
             want_count(t, 1);
             c.seed = to_u64(t[0]);
         }},
        {"run.init_perturbation_std",
         [](ExperimentConfig& c, const Tokens& t) { c.init_perturbation_std = one_real(t); }},
        {"run.ue_jitter_m", [](ExperimentConfig& c, const Tokens& t) { c.ue_jitter_m = one_real(t); }},
        {"run.record_trajectory",
         [](ExperimentConfig& c, const Tokens& t) {
             want_count(t, 1);
             c.record_trajectory = to_bool(t[0]);
         }},
    };
    return table;
}

} // namespace

std::string TrackerSpec::label() const
{
    return kind == Kind::Ekf ? std::string("EKF") : "PF-" + std::to_string(n_particles);
}

std::string to_string(PhasePolicy p)
{
    switch (p) {
    case PhasePolicy::BeamMatch:
        return "beam_match";
    case PhasePolicy::Random:
        return "random";
    case PhasePolicy::Fixed:
        return "fixed";
    }
    return "unknown";
}

PhasePolicy parse_phase_policy(const std::string& s)
{
    if (s == "beam_match")
        return PhasePolicy::BeamMatch;
    if (s == "random")
        return PhasePolicy::Random;
    if (s == "fixed")
        return PhasePolicy::Fixed;
    throw ConfigError("unknown phase policy '" + s + "' (expected beam_match, random or fixed)");
}

double ExperimentConfig::sigma2() const { return dbm_to_watts(noise_dbm); }

void ExperimentConfig::validate() const
{
    try {
        geometry.validate();
    } catch (const GeometryError& e) {
        throw ConfigError(e.what());
    }
    if ((geometry.bs - geometry.ue).norm() < 1e-9)
        throw ConfigError("geometry: BS and UE positions coincide");
    array.validate();
    mobility.validate();
    if (!(path_loss.ref_distance_m > 0.0))
        throw ConfigError("pathloss.ref_distance_m must be > 0");
    if (!std::isfinite(path_loss.exponent))
        throw ConfigError("pathloss.exponent must be finite");
    if (p_tx_dbm.empty())
        throw ConfigError("link.p_tx_dbm must list at least one value");
    for (double p : p_tx_dbm)
        if (!std::isfinite(p))
            throw ConfigError("link.p_tx_dbm values must be finite");
    if (std::isnan(noise_dbm) || noise_dbm == std::numeric_limits<double>::infinity())
        throw ConfigError("link.noise_dbm must be finite or -inf");
    if (trackers.empty())
        throw ConfigError("trackers must list at least one tracker");
    if (policies.empty())
        throw ConfigError("phase.policies must list at least one policy");
    if (!(pf_init_spread >= 0.0))
        throw ConfigError("pf.init_spread must be >= 0");
    if (!(pf_ess_fraction > 0.0 && pf_ess_fraction <= 1.0))
        throw ConfigError("pf.ess_fraction must be in (0, 1]");
    if (slots_per_block < 1)
        throw ConfigError("run.slots_per_block must be >= 1");
    if (n_blocks < 1)
        throw ConfigError("run.n_blocks must be >= 1");
    if (!(init_perturbation_std >= 0.0))
        throw ConfigError("run.init_perturbation_std must be >= 0");
    if (!(ue_jitter_m >= 0.0))
        throw ConfigError("run.ue_jitter_m must be >= 0");
}

ExperimentConfig parse_config(std::istream& in, const std::string& source)
{
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::string where = source + ":" + std::to_string(lineno) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const Tokens values = split_ws(line.substr(eq + 1));
        const auto it = handlers().find(key);
        if (it == handlers().end())
            throw ConfigError(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError(where + "duplicate key '" + key + "'");
        if (values.empty())
            throw ConfigError(where + "missing value for '" + key + "'");
        try {
            it->second(cfg, values);
        } catch (const ConfigError& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

std::string write_config(const ExperimentConfig& c)
{
    std::ostringstream os;
    const auto v3 = [](const Vec3& v) { return fmt_real(v.x()) + " " + fmt_real(v.y()) + " " + fmt_real(v.z()); };
    os << "geometry.bs = " << v3(c.geometry.bs) << "\n";
    os << "geometry.ris = " << v3(c.geometry.ris) << "\n";
    os << "geometry.ue = " << v3(c.geometry.ue) << "\n";
    os << "array.n_rx = " << c.array.n_rx << "\n";
    os << "array.l = " << c.array.l << "\n";
    os << "array.d_over_lambda = " << fmt_real(c.array.d_over_lambda) << "\n";
    os << "array.carrier_hz = " << fmt_real(c.array.carrier_hz) << "\n";
    os << "mobility.psi_s_deg = " << fmt_real(c.mobility.psi_s * 180.0 / std::numbers::pi) << "\n";
    os << "mobility.psi_r_deg = " << fmt_real(c.mobility.psi_r * 180.0 / std::numbers::pi) << "\n";
    os << "pathloss.ref_distance_m = " << fmt_real(c.path_loss.ref_distance_m) << "\n";
    os << "pathloss.exponent = " << fmt_real(c.path_loss.exponent) << "\n";
    os << "link.p_tx_dbm =";
    for (double p : c.p_tx_dbm)
        os << " " << fmt_real(p);
    os << "\nlink.noise_dbm = " << fmt_real(c.noise_dbm) << "\n";
    os << "trackers =";
    for (const auto& t : c.trackers)
        os << " " << (t.kind == TrackerSpec::Kind::Ekf ? std::string("ekf") : "pf:" + std::to_string(t.n_particles));
    os << "\nekf.qu_mode = "
       << (c.qu_mode == ProcessNoiseMode::Unsquared ? "unsquared" : "uniform_variance") << "\n";
    os << "pf.init_spread = " << fmt_real(c.pf_init_spread) << "\n";
    os << "pf.resample = " << (c.pf_resample == ResampleMode::Always ? "always" : "ess") << "\n";
    os << "pf.ess_fraction = " << fmt_real(c.pf_ess_fraction) << "\n";
    os << "phase.policies =";
    for (auto p : c.policies)
        os << " " << to_string(p);
    os << "\nrun.slots_per_block = " << c.slots_per_block << "\n";
    os << "run.n_blocks = " << c.n_blocks << "\n";
    os << "run.seed = " << c.seed << "\n";
    os << "run.init_perturbation_std = " << fmt_real(c.init_perturbation_std) << "\n";
    os << "run.ue_jitter_m = " << fmt_real(c.ue_jitter_m) << "\n";
    os << "run.record_trajectory = " << (c.record_trajectory ? "true" : "false") << "\n";
    return os.str();
}

} // namespace ristrack
