#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "vfil/domain/geometry.hpp"
#include "vfil/errors.hpp"
#include "vfil/gp/initial_data.hpp"
#include "vfil/domain/functionals.hpp"
#include "vfil/kmd/kmd.hpp"
#include "vfil/kmd/reference.hpp"

namespace vfil::experiments {

/// One value of the flat config format: number, string, bool or number list.
using ConfigValue = std::variant<double, std::string, bool, std::vector<double>>;

/// "section.key" -> value.
using ConfigTable = std::map<std::string, ConfigValue>;

namespace detail {

inline std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& s, int line) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw FormatError("line " + std::to_string(line) + ": not a number: '" + s + "'");
    return v;
}

inline std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

}  // namespace detail

/// Parses `[section]` headers and `key = value` lines. Values: "string",
/// true/false, numbers, [n1, n2, ...]. '#' starts a comment.
inline ConfigTable parse_config(const std::string& text) {
    ConfigTable table;
    std::istringstream in(text);
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw FormatError("line " + std::to_string(line_no) + ": unterminated section");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty key or value");
        const std::string full = section.empty() ? key : section + "." + key;
        if (table.count(full)) throw FormatError("line " + std::to_string(line_no) + ": duplicate key " + full);
        if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"')
                throw FormatError("line " + std::to_string(line_no) + ": unterminated string");
            table[full] = val.substr(1, val.size() - 2);
        } else if (val == "true" || val == "false") {
            table[full] = (val == "true");
        } else if (val.front() == '[') {
            if (val.back() != ']') throw FormatError("line " + std::to_string(line_no) + ": unterminated list");
            std::vector<double> xs;
            std::stringstream items(val.substr(1, val.size() - 2));
            std::string item;
            while (std::getline(items, item, ',')) {
                item = detail::trim(item);
                if (!item.empty()) xs.push_back(detail::parse_number(item, line_no));
            }
            table[full] = xs;
        } else {
            table[full] = detail::parse_number(val, line_no);
        }
    }
    return table;
}

enum class ScenarioKind { single_straight, rotating_pair, helix_single, helix_pair, polygon, custom };

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::rotating_pair;
    double d = 1.0;           // rotating_pair separation
    double A = 0.2, k = 1.0;  // helix amplitude / wavenumber (helix_single, helix_pair)
    double R = 1.0;           // helix_pair radius, polygon radius
    int n = 3;                // polygon sides
    Vec2 offset;              // single_straight position
    std::string file;         // custom: CSV, one row per z sample, x1,y1,...,xn,yn
};

struct GeometrySpec {
    double half_x = 1.0, half_y = 1.0, L = 1.0;
    int nx = 64, ny = 64, nz = 16;
    /// > 0: choose nx, ny per epsilon so that dx = eps / cells_per_eps.
    double cells_per_eps = 0.0;

    DomainGeometry for_epsilon(double eps) const {
        int cx = nx, cy = ny;
        if (cells_per_eps > 0.0) {
            const double dx = eps / cells_per_eps;
            cx = std::max(8, int(std::lround(2.0 * half_x / dx)));
            cy = std::max(8, int(std::lround(2.0 * half_y / dx)));
        }
        return DomainGeometry::rectangle(half_x, half_y, L, cx, cy, nz);
    }
};

struct ExperimentConfig {
    ScenarioSpec scenario;
    GeometrySpec geometry;
    std::vector<double> epsilon_list{0.1};
    double t_final = 0.1;           // rescaled
    double observe_interval = 0.02; // rescaled
    std::string output_dir = "out";
    int workers = 1;
    bool gamma_calibrate = true;
    double gamma = 0.0;             // used when gamma_calibrate is false
    std::string gamma_cache;        // optional file read/written by calibration

    kmd::IntegratorConfig kmd;
    double gp_dt_phys = 0.0;
    gp::CoreProfile profile = gp::CoreProfile::pade;
    gp::PhaseKind phase = gp::PhaseKind::harmonic;
    bool measured_plans = false;

    double cutoff_r = 0.1;
    double detect_window = 2.5;
    std::string source = "<defaults>";
};

namespace detail {

template <class T>
const T* get(const ConfigTable& t, const std::string& key) {
    const auto it = t.find(key);
    if (it == t.end()) return nullptr;
    if (const T* v = std::get_if<T>(&it->second)) return v;
    throw FormatError("key " + key + " has the wrong type");
}

inline void read(const ConfigTable& t, const std::string& key, double& out) {
    if (const auto* v = get<double>(t, key)) out = *v;
}

inline void read(const ConfigTable& t, const std::string& key, int& out) {
    if (const auto* v = get<double>(t, key)) {
        if (*v != std::floor(*v)) throw FormatError("key " + key + " must be an integer");
        out = int(*v);
    }
}

inline void read(const ConfigTable& t, const std::string& key, bool& out) {
    if (const auto* v = get<bool>(t, key)) out = *v;
}

inline void read(const ConfigTable& t, const std::string& key, std::string& out) {
    if (const auto* v = get<std::string>(t, key)) out = *v;
}

template <class E>
E pick(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, E>> options) {
    for (const auto& [name, e] : options)
        if (value == name) return e;
    throw FormatError("unknown value '" + value + "' for " + key);
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "scenario.kind", "scenario.d", "scenario.A", "scenario.k", "scenario.R", "scenario.n", "scenario.x0",
        "scenario.y0", "scenario.file", "geometry.shape", "geometry.half_x", "geometry.half_y", "geometry.L",
        "geometry.nx", "geometry.ny", "geometry.nz", "geometry.cells_per_eps", "run.epsilon", "run.t_final",
        "run.observe_interval", "run.output_dir", "run.workers", "run.gamma", "run.gamma_cache", "kmd.dt",
        "kmd.scheme", "kmd.collision_threshold", "kmd.substeps", "gp.dt_phys", "gp.profile", "gp.phase",
        "gp.measured_plans", "metrics.cutoff_r", "metrics.detect_window"};
    return keys;
}

}  // namespace detail

inline std::string scenario_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::single_straight: return "single_straight";
        case ScenarioKind::rotating_pair: return "rotating_pair";
        case ScenarioKind::helix_single: return "helix_single";
        case ScenarioKind::helix_pair: return "helix_pair";
        case ScenarioKind::polygon: return "polygon";
        case ScenarioKind::custom: return "custom";
    }
    return "?";
}

inline std::string profile_name(gp::CoreProfile p) {
    return p == gp::CoreProfile::pade ? "pade" : p == gp::CoreProfile::tanh ? "tanh" : "radial";
}

inline ExperimentConfig config_from_table(const ConfigTable& t) {
    for (const auto& [key, value] : t) {
        bool known = false;
        for (const auto& k : detail::known_keys()) known = known || k == key;
        if (!known) throw FormatError("unknown config key " + key);
    }
    ExperimentConfig c;
    using detail::read;
    std::string s;
    if (const auto* v = detail::get<std::string>(t, "scenario.kind"))
        c.scenario.kind = detail::pick<ScenarioKind>("scenario.kind", *v,
                                                     {{"single_straight", ScenarioKind::single_straight},
                                                      {"rotating_pair", ScenarioKind::rotating_pair},
                                                      {"helix_single", ScenarioKind::helix_single},
                                                      {"helix_pair", ScenarioKind::helix_pair},
                                                      {"polygon", ScenarioKind::polygon},
                                                      {"custom", ScenarioKind::custom}});
    read(t, "scenario.d", c.scenario.d);
    read(t, "scenario.A", c.scenario.A);
    read(t, "scenario.k", c.scenario.k);
    read(t, "scenario.R", c.scenario.R);
    read(t, "scenario.n", c.scenario.n);
    read(t, "scenario.x0", c.scenario.offset.x);
    read(t, "scenario.y0", c.scenario.offset.y);
    read(t, "scenario.file", c.scenario.file);

    s = "rectangle";
    read(t, "geometry.shape", s);
    if (s != "rectangle") throw InvalidParameters("experiments need geometry.shape = \"rectangle\"");
    read(t, "geometry.half_x", c.geometry.half_x);
    read(t, "geometry.half_y", c.geometry.half_y);
    read(t, "geometry.L", c.geometry.L);
    read(t, "geometry.nx", c.geometry.nx);
    read(t, "geometry.ny", c.geometry.ny);
    read(t, "geometry.nz", c.geometry.nz);
    read(t, "geometry.cells_per_eps", c.geometry.cells_per_eps);

    if (const auto* v = detail::get<std::vector<double>>(t, "run.epsilon")) c.epsilon_list = *v;
    else if (const auto* e = detail::get<double>(t, "run.epsilon")) c.epsilon_list = {*e};
    read(t, "run.t_final", c.t_final);
    read(t, "run.observe_interval", c.observe_interval);
    read(t, "run.output_dir", c.output_dir);
    read(t, "run.workers", c.workers);
    if (t.count("run.gamma")) {
        if (const auto* g = std::get_if<double>(&t.at("run.gamma"))) {
            c.gamma_calibrate = false;
            c.gamma = *g;
        } else if (std::get_if<std::string>(&t.at("run.gamma")) &&
                   std::get<std::string>(t.at("run.gamma")) == "calibrate") {
            c.gamma_calibrate = true;
        } else {
            throw FormatError("run.gamma must be a number or \"calibrate\"");
        }
    }
    read(t, "run.gamma_cache", c.gamma_cache);

    read(t, "kmd.dt", c.kmd.dt);
    if (const auto* v = detail::get<std::string>(t, "kmd.scheme"))
        c.kmd.scheme = detail::pick<kmd::Scheme>("kmd.scheme", *v,
                                                 {{"strang", kmd::Scheme::strang_split}, {"rk4", kmd::Scheme::rk4_spectral}});
    read(t, "kmd.collision_threshold", c.kmd.collision_threshold);
    read(t, "kmd.substeps", c.kmd.substeps);

    read(t, "gp.dt_phys", c.gp_dt_phys);
    if (const auto* v = detail::get<std::string>(t, "gp.profile"))
        c.profile = detail::pick<gp::CoreProfile>(
            "gp.profile", *v, {{"pade", gp::CoreProfile::pade}, {"tanh", gp::CoreProfile::tanh}, {"radial", gp::CoreProfile::radial}});
    if (const auto* v = detail::get<std::string>(t, "gp.phase"))
        c.phase = detail::pick<gp::PhaseKind>("gp.phase", *v,
                                              {{"angle_sum", gp::PhaseKind::angle_sum}, {"harmonic", gp::PhaseKind::harmonic}});
    read(t, "gp.measured_plans", c.measured_plans);

    read(t, "metrics.cutoff_r", c.cutoff_r);
    read(t, "metrics.detect_window", c.detect_window);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    auto c = config_from_table(parse_config(ss.str()));
    c.source = path;
    return c;
}

/// Shortest round-trip decimal form, so the canonical text is stable.
inline std::string fmt(double v) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// Every effective setting, one `section.key = value` per line in a fixed
/// order. Hashing this gives the config hash.
inline std::string canonical_text(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "scenario.kind = " << scenario_name(c.scenario.kind) << "\n"
      << "scenario.d = " << fmt(c.scenario.d) << "\n"
      << "scenario.A = " << fmt(c.scenario.A) << "\n"
      << "scenario.k = " << fmt(c.scenario.k) << "\n"
      << "scenario.R = " << fmt(c.scenario.R) << "\n"
      << "scenario.n = " << c.scenario.n << "\n"
      << "scenario.x0 = " << fmt(c.scenario.offset.x) << "\n"
      << "scenario.y0 = " << fmt(c.scenario.offset.y) << "\n"
      << "scenario.file = " << c.scenario.file << "\n"
      << "geometry.half_x = " << fmt(c.geometry.half_x) << "\n"
      << "geometry.half_y = " << fmt(c.geometry.half_y) << "\n"
      << "geometry.L = " << fmt(c.geometry.L) << "\n"
      << "geometry.nx = " << c.geometry.nx << "\n"
      << "geometry.ny = " << c.geometry.ny << "\n"
      << "geometry.nz = " << c.geometry.nz << "\n"
      << "geometry.cells_per_eps = " << fmt(c.geometry.cells_per_eps) << "\n"
      << "run.epsilon =";
    for (double e : c.epsilon_list) o << " " << fmt(e);
    o << "\n"
      << "run.t_final = " << fmt(c.t_final) << "\n"
      << "run.observe_interval = " << fmt(c.observe_interval) << "\n"
      << "run.gamma = " << (c.gamma_calibrate ? std::string("calibrate") : fmt(c.gamma)) << "\n"
      << "kmd.dt = " << fmt(c.kmd.dt) << "\n"
      << "kmd.scheme = " << (c.kmd.scheme == kmd::Scheme::strang_split ? "strang" : "rk4") << "\n"
      << "kmd.collision_threshold = " << fmt(c.kmd.collision_threshold) << "\n"
      << "kmd.substeps = " << c.kmd.substeps << "\n"
      << "gp.dt_phys = " << fmt(c.gp_dt_phys) << "\n"
      << "gp.profile = " << profile_name(c.profile) << "\n"
      << "gp.phase = " << (c.phase == gp::PhaseKind::harmonic ? "harmonic" : "angle_sum") << "\n"
      << "gp.measured_plans = " << (c.measured_plans ? "true" : "false") << "\n"
      << "metrics.cutoff_r = " << fmt(c.cutoff_r) << "\n"
      << "metrics.detect_window = " << fmt(c.detect_window) << "\n";
    return o.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_text(c))));
    return buf;
}

/// Custom scenario file: one row per z sample, x1,y1,...,xn,yn.
inline FilamentConfiguration load_custom_filaments(const std::string& path, double L) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open filament file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        line = detail::trim(detail::strip_comment(line));
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) row.push_back(detail::parse_number(detail::trim(item), line_no));
        if (row.empty() || row.size() % 2) throw FormatError(path + ": rows need x,y pairs");
        if (!rows.empty() && row.size() != rows[0].size()) throw FormatError(path + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.size() < 8) throw FormatError(path + ": need at least 8 z samples");
    FilamentConfiguration f(int(rows[0].size() / 2), int(rows.size()), L);
    for (int k = 0; k < f.nz(); ++k)
        for (int j = 0; j < f.n(); ++j) f(j, k) = {rows[k][2 * j], rows[k][2 * j + 1]};
    return f;
}

/// Initial filaments f0 on nz samples.
inline FilamentConfiguration build_scenario(const ScenarioSpec& s, int nz, double L) {
    switch (s.kind) {
        case ScenarioKind::single_straight: {
            FilamentConfiguration f(1, nz, L);
            for (int k = 0; k < nz; ++k) f(0, k) = s.offset;
            return f;
        }
        case ScenarioKind::rotating_pair: return kmd::reference_sample(kmd::RotatingPair{s.d}, nz, L, 0.0);
        case ScenarioKind::helix_single: return kmd::reference_sample(kmd::HelixMode{s.A, s.k}, nz, L, 0.0);
        case ScenarioKind::helix_pair: return kmd::reference_sample(kmd::HelixPair{s.R, s.k}, nz, L, 0.0);
        case ScenarioKind::polygon: return kmd::reference_sample(kmd::Polygon{s.n, s.R}, nz, L, 0.0);
        case ScenarioKind::custom: {
            const auto f = load_custom_filaments(s.file, L);
            return f.nz() == nz ? f : resample(f, nz);
        }
    }
    throw InvalidParameters("unknown scenario");
}

/// Checks ranges, ordering of the epsilon list and rho_f0 > 4 r.
inline void validate_config(const ExperimentConfig& c) {
    if (c.epsilon_list.empty()) throw InvalidParameters("run.epsilon is empty");
    for (std::size_t i = 0; i < c.epsilon_list.size(); ++i) {
        const double e = c.epsilon_list[i];
        if (!(e > 0.0 && e < 1.0)) throw InvalidParameters("epsilon values must lie in (0,1)");
        if (i && !(e < c.epsilon_list[i - 1])) throw InvalidParameters("run.epsilon must be strictly decreasing");
    }
    if (!(c.t_final >= 0.0)) throw InvalidParameters("run.t_final must be >= 0");
    if (!(c.observe_interval > 0.0)) throw InvalidParameters("run.observe_interval must be > 0");
    if (c.workers < 1) throw InvalidParameters("run.workers must be >= 1");
    if (!(c.cutoff_r > 0.0)) throw InvalidParameters("metrics.cutoff_r must be > 0");
    c.kmd.validate();
    c.geometry.for_epsilon(c.epsilon_list.front()).validate();
    const auto f0 = build_scenario(c.scenario, c.geometry.nz, c.geometry.L);
    if (f0.n() >= 2 && !(min_separation(f0) > 4.0 * c.cutoff_r))
        throw InvalidParameters("scenario separation rho_f0 must exceed 4 * metrics.cutoff_r");
}

}  // namespace vfil::experiments
