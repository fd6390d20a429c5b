#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ristrack/experiment.hpp"

namespace ristrack {

/// Column order of the results CSV.
inline const std::vector<std::string> kCsvColumns = {
    "tracker", "n_particles", "phase_policy", "p_tx_dbm", "L", "nmse",
    "nmse_db", "ess_mean", "degenerate_events", "clamp_events", "seconds"};

/// One row per sweep point, RFC 4180 quoting, LF endings, 17 significant digits.
std::string format_csv(const std::vector<RunResult>& results);
void emit_csv(const std::vector<RunResult>& results, const std::filesystem::path& path);

/// Per-slot NMSE over blocks, one row per (sweep point, slot).
void emit_trajectory_csv(const std::vector<RunResult>& results, const std::filesystem::path& path);

using CsvRow = std::map<std::string, std::string>;

/// Minimal RFC 4180 reader keyed by header names.
std::vector<CsvRow> parse_csv(const std::string& text);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

/// Gnuplot script drawing NMSE versus pTX on a log axis, one curve per
/// (tracker, particle count, phase policy) found in the results. The CSV is
/// referenced by `csv_name`, relative to the script's directory.
std::string format_plot_script(const std::vector<RunResult>& results, const std::string& csv_name);
void emit_plot_script(const std::vector<RunResult>& results, const std::filesystem::path& path,
                      const std::string& csv_name = "results.csv");

std::string format_real(double v);

} // namespace ristrack
