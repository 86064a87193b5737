#include "salem2d/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "salem2d/errors.hpp"

namespace salem2d {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_int(std::int64_t v) { return std::to_string(v); }

void emit_csv(const CsvTable& table, std::ostream& os) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
        os << (i ? "," : "") << table.header[i];
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << row[i];
        os << "\n";
    }
}

void emit_csv(const CsvTable& table, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw numeric_error("emit_csv: cannot open " + path);
    emit_csv(table, f);
    if (!f.good()) throw numeric_error("emit_csv: write failure on " + path);
}

CsvTable parse_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(pos));
                break;
            }
            cells.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

CsvTable parse_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw numeric_error("parse_csv: cannot open " + path);
    return parse_csv(f);
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void write_manifest(const RunManifest& manifest, const std::string& output_path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool"] = "salem2d";
    j["tool_version"] = "1.0.0";
    j["command_line"] = manifest.command_line;
    char digest[32];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(manifest.config_digest));
    j["config_digest"] = digest;
    j["seed"] = manifest.seed;
    j["wall_clock_s"] = manifest.wall_clock_s;
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& [op, secs] : manifest.timings) ops.push_back({{"op", op}, {"seconds", secs}});
    j["timings"] = ops;
    std::ofstream f(output_path + ".manifest.json", std::ios::binary);
    if (!f) throw numeric_error("write_manifest: cannot open " + output_path + ".manifest.json");
    f << j.dump(2) << "\n";
}

namespace {

nlohmann::json report_to_json(const StageReport& r) {
    return {
        {"M", r.M},
        {"delta", r.delta},
        {"R_check", r.R_check},
        {"enum_radius", r.enum_radius},
        {"grid_points", r.grid_points},
        {"grid_margin", r.grid_margin},
        {"grid_argmax", {r.grid_argmax.x, r.grid_argmax.y}},
        {"grid_min_g", r.grid_min_g},
        {"coeff_abs_sum", r.coeff_abs_sum},
        {"tail_chi0", r.tail_chi0},
        {"tail_model_g", r.tail_model_g},
        {"band_margin", r.band_margin},
        {"band_hi", r.band_hi},
        {"mu_prev_zero", {r.mu_prev_zero.real(), r.mu_prev_zero.imag()}},
        {"mu_zero", {r.mu_zero.real(), r.mu_zero.imag()}},
    };
}

StageReport report_from_json(const nlohmann::json& j) {
    StageReport r;
    r.M = j.at("M").get<double>();
    r.delta = j.at("delta").get<double>();
    r.R_check = j.at("R_check").get<double>();
    r.enum_radius = j.at("enum_radius").get<double>();
    r.grid_points = j.at("grid_points").get<std::uint64_t>();
    r.grid_margin = j.at("grid_margin").get<double>();
    r.grid_argmax = {j.at("grid_argmax")[0].get<double>(), j.at("grid_argmax")[1].get<double>()};
    r.grid_min_g = j.at("grid_min_g").get<double>();
    r.coeff_abs_sum = j.at("coeff_abs_sum").get<double>();
    r.tail_chi0 = j.at("tail_chi0").get<double>();
    r.tail_model_g = j.at("tail_model_g").get<double>();
    r.band_margin = j.at("band_margin").get<double>();
    r.band_hi = j.at("band_hi").get<double>();
    r.mu_prev_zero = {j.at("mu_prev_zero")[0].get<double>(), j.at("mu_prev_zero")[1].get<double>()};
    r.mu_zero = {j.at("mu_zero")[0].get<double>(), j.at("mu_zero")[1].get<double>()};
    return r;
}

} // namespace

std::string measure_spec_to_json(const MeasureSpec& spec) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tau"] = spec.tau;
    j["mode"] = to_string(spec.mode);
    j["window"] = {{"cx", spec.window.center.x},
                   {"cy", spec.window.center.y},
                   {"radius", spec.window.radius},
                   {"K", spec.window.bump.K},
                   {"quad_tol", spec.window.bump.quad_tol}};
    nlohmann::json stages = nlohmann::json::array();
    for (const Stage& s : spec.stages)
        stages.push_back({{"M", s.M}, {"delta", s.delta}, {"report", report_to_json(s.report)}});
    j["stages"] = stages;
    j["trunc_radii"] = spec.trunc_radii;
    return j.dump(2) + "\n";
}

MeasureSpec measure_spec_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != 1)
        throw numeric_error("measure spec: unsupported schema_version");
    MeasureSpec spec;
    spec.tau = j.at("tau").get<double>();
    auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!mode) throw numeric_error("measure spec: bad mode");
    spec.mode = *mode;
    const auto& w = j.at("window");
    spec.window.center = {w.at("cx").get<double>(), w.at("cy").get<double>()};
    spec.window.radius = w.at("radius").get<double>();
    spec.window.bump.K = w.at("K").get<int>();
    spec.window.bump.quad_tol = w.at("quad_tol").get<double>();
    for (const auto& s : j.at("stages"))
        spec.stages.push_back({s.at("M").get<double>(), s.at("delta").get<double>(),
                               report_from_json(s.at("report"))});
    spec.trunc_radii = j.at("trunc_radii").get<std::vector<double>>();
    return spec;
}

void save_measure_spec(const MeasureSpec& spec, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw numeric_error("save_measure_spec: cannot open " + path);
    f << measure_spec_to_json(spec);
}

MeasureSpec load_measure_spec(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw numeric_error("load_measure_spec: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return measure_spec_from_json(ss.str());
}

CsvTable gauss_list_table(const std::vector<GaussInt>& zs) {
    CsvTable t;
    t.header = {"re", "im"};
    for (const GaussInt& z : zs) t.rows.push_back({fmt_int(z.re), fmt_int(z.im)});
    return t;
}

CsvTable divisor_stat_table(const DivisorStatTable& t) {
    CsvTable out;
    out.header = {"kind", "lo", "hi", "max_zeta", "argmax_re", "argmax_im", "count"};
    for (const auto& r : t.rows)
        out.rows.push_back({"dyadic", fmt_int(r.lo), fmt_int(r.hi), fmt_double(r.max_zeta),
                            fmt_int(r.argmax.re), fmt_int(r.argmax.im),
                            fmt_int(std::int64_t(r.count))});
    if (!t.rows.empty())
        out.rows.push_back({"global", fmt_int(t.rows.front().lo), fmt_int(t.rows.back().hi),
                            fmt_double(t.global_max), fmt_int(t.global_argmax.re),
                            fmt_int(t.global_argmax.im), "0"});
    return out;
}

CsvTable prime_stat_table(const std::vector<PrimeCountRow>& rows) {
    CsvTable t;
    t.header = {"M", "count", "ratio"};
    for (const auto& r : rows)
        t.rows.push_back({fmt_double(r.M), fmt_int(std::int64_t(r.count)), fmt_double(r.ratio)});
    return t;
}

CsvTable shell_scan_table(const ShellScanTable& t) {
    CsvTable out;
    out.header = {"shell_lo", "shell_hi", "max_ratio", "argmax_ell"};
    for (const auto& r : t.rows)
        out.rows.push_back({fmt_double(r.lo), fmt_double(r.hi), fmt_double(r.max_ratio),
                            to_string(r.argmax)});
    return out;
}

CsvTable decay_report_table(const DecayReport& r) {
    CsvTable out;
    out.header = {"shell_lo", "shell_hi", "max_ratio", "argmax_x", "argmax_y", "samples"};
    for (const auto& s : r.shells)
        out.rows.push_back({fmt_double(s.lo), fmt_double(s.hi), fmt_double(s.max_ratio),
                            fmt_double(s.argmax.x), fmt_double(s.argmax.y),
                            fmt_int(std::int64_t(s.samples))});
    return out;
}

} // namespace salem2d
