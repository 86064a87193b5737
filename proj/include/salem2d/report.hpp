#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "salem2d/measure.hpp"

namespace salem2d {

// Column-ordered CSV payload; all emission goes through this so the decimal
// formatting (12 significant digits) and the parse-back path stay in one
// place.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

std::string fmt_double(double v);            // %.12g
std::string fmt_int(std::int64_t v);

void emit_csv(const CsvTable& table, std::ostream& os);
void emit_csv(const CsvTable& table, const std::string& path);
CsvTable parse_csv(std::istream& is);
CsvTable parse_csv_file(const std::string& path);

// Deterministic run manifest written alongside every output file.
struct RunManifest {
    std::string command_line;
    std::uint64_t config_digest = 0;
    std::uint64_t seed = 0;
    double wall_clock_s = 0.0;
    std::vector<std::pair<std::string, double>> timings;
};
std::uint64_t fnv1a64(const std::string& s);
void write_manifest(const RunManifest& manifest, const std::string& output_path);

// spec.json round trip (schema_version 1)
void save_measure_spec(const MeasureSpec& spec, const std::string& path);
MeasureSpec load_measure_spec(const std::string& path);
std::string measure_spec_to_json(const MeasureSpec& spec);
MeasureSpec measure_spec_from_json(const std::string& text);

// table builders for the CLI surfaces
CsvTable gauss_list_table(const std::vector<GaussInt>& zs);
CsvTable divisor_stat_table(const DivisorStatTable& t);
CsvTable prime_stat_table(const std::vector<PrimeCountRow>& rows);
CsvTable shell_scan_table(const ShellScanTable& t);
CsvTable decay_report_table(const DecayReport& r);

} // namespace salem2d
