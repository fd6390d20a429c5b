#include "ristrack/report.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ristrack {

namespace {

std::string quote(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    out.close();
    if (!out)
        throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string join_row(const std::vector<std::string>& fields)
{
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            line += ',';
        line += quote(fields[i]);
    }
    return line + "\n";
}

} // namespace

std::string format_real(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_csv(const std::vector<RunResult>& results)
{
    std::string text = join_row(kCsvColumns);
    for (const auto& r : results) {
        text += join_row({r.point.tracker.name(), std::to_string(r.point.tracker.n_particles),
                          to_string(r.point.policy), format_real(r.point.p_tx_dbm), std::to_string(r.l),
                          format_real(r.nmse), format_real(r.nmse_db()), format_real(r.ess_mean),
                          std::to_string(r.degenerate_events), std::to_string(r.clamp_events),
                          format_real(r.seconds)});
    }
    return text;
}

void emit_csv(const std::vector<RunResult>& results, const std::filesystem::path& path)
{
    write_file(path, format_csv(results));
}

void emit_trajectory_csv(const std::vector<RunResult>& results, const std::filesystem::path& path)
{
    std::string text = join_row({"tracker", "n_particles", "phase_policy", "p_tx_dbm", "slot", "nmse"});
    for (const auto& r : results) {
        for (std::size_t k = 0; k < r.per_slot.size(); ++k) {
            text += join_row({r.point.tracker.name(), std::to_string(r.point.tracker.n_particles),
                              to_string(r.point.policy), format_real(r.point.p_tx_dbm), std::to_string(k + 1),
                              format_real(r.per_slot[k].value())});
        }
    }
    write_file(path, text);
}

std::vector<CsvRow> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (in_quotes)
        throw std::runtime_error("csv: unterminated quoted field");
    if (any) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }

    std::vector<CsvRow> rows;
    if (records.empty())
        return rows;
    const auto& header = records.front();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != header.size())
            throw std::runtime_error("csv: row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                                     " fields, header has " + std::to_string(header.size()));
        CsvRow row;
        for (std::size_t c = 0; c < header.size(); ++c)
            row[header[c]] = records[r][c];
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string format_plot_script(const std::vector<RunResult>& results, const std::string& csv_name)
{
    // Curves in first-seen order.
    std::vector<std::tuple<std::string, int, std::string, std::string>> curves;
    std::set<std::tuple<std::string, int, std::string>> seen;
    std::set<std::string> policies;
    for (const auto& r : results)
        policies.insert(to_string(r.point.policy));
    for (const auto& r : results) {
        const auto key = std::make_tuple(r.point.tracker.name(), r.point.tracker.n_particles, to_string(r.point.policy));
        if (!seen.insert(key).second)
            continue;
        std::string title = r.point.tracker.label();
        if (policies.size() > 1)
            title += " (" + to_string(r.point.policy) + ")";
        curves.emplace_back(std::get<0>(key), std::get<1>(key), std::get<2>(key), title);
    }

    std::ostringstream os;
    os << "# NMSE of H versus pTX\n";
    os << "set datafile separator ','\n";
    os << "set key autotitle columnhead\n";
    os << "set logscale y\n";
    os << "set format y '10^{%L}'\n";
    os << "set xlabel 'pTX (dBm)'\n";
    os << "set ylabel 'NMSE'\n";
    os << "set grid\n";
    os << "set key top right\n";
    os << "csv = '" << csv_name << "'\n";
    os << "# columns: 1 tracker, 2 n_particles, 3 phase_policy, 4 p_tx_dbm, 6 nmse\n";
    if (curves.empty()) {
        os << "# no results\n";
        return os.str();
    }
    os << "plot \\\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& [tracker, n, policy, title] = curves[i];
        os << "  csv using 4:((strcol(1) eq '" << tracker << "' && $2 == " << n << " && strcol(3) eq '" << policy
           << "') ? $6 : 1/0) with linespoints title '" << title << "'";
        os << (i + 1 < curves.size() ? ", \\\n" : "\n");
    }
    return os.str();
}

void emit_plot_script(const std::vector<RunResult>& results, const std::filesystem::path& path,
                      const std::string& csv_name)
{
    write_file(path, format_plot_script(results, csv_name));
}

} // namespace ristrack
