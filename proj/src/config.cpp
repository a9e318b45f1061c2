#include "neckflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace neckflow {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

Scalar parse_double(const std::string& v, int line, const std::string& key) {
    try {
        size_t pos;
        const Scalar x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail(line, "key '" + key + "' expects a number, got '" + v + "'");
    }
}

// "auto" maps to the sentinel value that selects the documented default.
Scalar parse_double_or_auto(const std::string& v, int line, const std::string& key,
                            Scalar sentinel) {
    if (v == "auto") return sentinel;
    return parse_double(v, line, key);
}

long parse_int(const std::string& v, int line, const std::string& key) {
    try {
        size_t pos;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail(line, "key '" + key + "' expects an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(line, "key '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace

ProfileGrid RunConfig::make_grid() const { return neckflow::make_grid(grid_a, grid_b, grid_n); }

FlowState RunConfig::initial_state() const {
    PresetSpec spec = preset;
    if (spec.kind == PresetKind::table && !spec.table && !preset_file.empty()) {
        spec = load_table_csv(preset_file);
    }
    return preset_profile(spec, make_grid());
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::string preset_kind_str = "cylinder";
    std::map<std::string, Scalar> preset_params;

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    std::string section;
    std::map<std::string, int> seen;

    auto handle = [&](const std::string& key, const std::string& value) {
        const std::string full = section + "." + key;
        if (seen.count(full)) {
            fail(line, "duplicate key '" + key + "' in [" + section + "] (first on line " +
                           std::to_string(seen[full]) + ")");
        }
        seen[full] = line;

        if (section == "grid") {
            if (key == "a") cfg.grid_a = parse_double(value, line, key);
            else if (key == "b") cfg.grid_b = parse_double(value, line, key);
            else if (key == "n") cfg.grid_n = parse_int(value, line, key);
            else fail(line, "unknown key '" + key + "' in [grid]");
        } else if (section == "preset") {
            if (key == "kind") preset_kind_str = value;
            else if (key == "file") cfg.preset_file = value;
            else if (key == "r" || key == "m" || key == "A" || key == "w" || key == "c") {
                preset_params[key] = parse_double(value, line, key);
            } else fail(line, "unknown key '" + key + "' in [preset]");
        } else if (section == "controls") {
            auto& c = cfg.controls;
            if (key == "scheme") {
                try { c.scheme = scheme_from_name(value); }
                catch (const ConfigError& e) { fail(line, e.what()); }
            }
            else if (key == "safety") c.safety = parse_double(value, line, key);
            else if (key == "rho_stop") c.rho_stop = parse_double_or_auto(value, line, key, -1);
            else if (key == "t_max") c.t_max = parse_double(value, line, key);
            else if (key == "regrid_factor") c.regrid_factor = static_cast<int>(parse_int(value, line, key));
            else if (key == "regrid_trigger") c.regrid_trigger = parse_double(value, line, key);
            else if (key == "snapshot_stride") c.snapshot_stride = static_cast<int>(parse_int(value, line, key));
            else if (key == "max_nodes") c.max_nodes = parse_int(value, line, key);
            else if (key == "wall_clock_budget") c.wall_clock_budget = parse_double(value, line, key);
            else fail(line, "unknown key '" + key + "' in [controls]");
        } else if (section == "monitors") {
            auto& m = cfg.monitors;
            if (key == "enabled") cfg.monitors_enabled = parse_bool(value, line, key);
            else if (key == "c") m.c = parse_double(value, line, key);
            else if (key == "mu") m.mu = parse_double(value, line, key);
            else if (key == "lambda") m.lambda = parse_double_or_auto(value, line, key, -1);
            else if (key == "pinned_cap") m.pinned_cap = parse_double_or_auto(value, line, key, -1);
            else if (key == "c0") m.c0 = parse_double(value, line, key);
            else if (key == "tol_growth") m.tol_growth = parse_double(value, line, key);
            else if (key == "extended_identities") m.extended_identities = parse_bool(value, line, key);
            else fail(line, "unknown key '" + key + "' in [monitors]");
        } else if (section == "analysis") {
            auto& a = cfg.analysis;
            if (key == "enabled") cfg.analysis_enabled = parse_bool(value, line, key);
            else if (key == "fit_window_fraction") a.fit_window_fraction = parse_double(value, line, key);
            else if (key == "rate_cap") a.rate_cap = parse_double(value, line, key);
            else if (key == "rate_tail_lo") a.rate_tail_lo = parse_double(value, line, key);
            else if (key == "rate_tail_hi") a.rate_tail_hi = parse_double(value, line, key);
            else if (key == "i_max") a.i_max = static_cast<int>(parse_int(value, line, key));
            else if (key == "rescale_window") a.rescale_window = parse_double(value, line, key);
            else if (key == "compare_window") a.compare_window = parse_double(value, line, key);
            else if (key == "eps_x") a.eps_x = parse_double_or_auto(value, line, key, -1);
            else if (key == "eps_t_fraction") a.eps_t_fraction = parse_double(value, line, key);
            else fail(line, "unknown key '" + key + "' in [analysis]");
        } else if (section == "output") {
            if (key == "dir") cfg.output_dir = value;
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, line, key));
            else fail(line, "unknown key '" + key + "' in [output]");
        } else {
            fail(line, "key '" + key + "' outside of any known section");
        }
    };

    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "grid" && section != "preset" && section != "controls" &&
                section != "monitors" && section != "analysis" && section != "output") {
                fail(line, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        handle(key, value);
    }

    // Cross-key validation: every module precondition checked before compute.
    cfg.preset.kind = preset_kind_from_name(preset_kind_str);
    cfg.preset.params = std::move(preset_params);
    if (cfg.preset.kind == PresetKind::table && cfg.preset_file.empty()) {
        throw ConfigError("config: preset kind 'table' requires [preset] file = <csv>");
    }
    make_grid(cfg.grid_a, cfg.grid_b, cfg.grid_n);  // bounds and node count
    cfg.controls.validate();
    if (!(cfg.monitors.mu > 0.75)) {
        throw ConfigError("config: [monitors] mu = " + std::to_string(cfg.monitors.mu) +
                          " rejected; the pinned-quantity estimate requires mu > 3/4");
    }
    if (cfg.monitors.c <= 0) throw ConfigError("config: [monitors] c must be positive");
    if (cfg.monitors.c0 <= 0) throw ConfigError("config: [monitors] c0 must be positive");
    if (!(cfg.analysis.fit_window_fraction > 0 && cfg.analysis.fit_window_fraction <= 1)) {
        throw ConfigError("config: [analysis] fit_window_fraction must lie in (0, 1]");
    }
    if (cfg.analysis.i_max < 0) throw ConfigError("config: [analysis] i_max must be >= 0");
    if (!(cfg.analysis.rate_tail_lo > 0 && cfg.analysis.rate_tail_hi > cfg.analysis.rate_tail_lo)) {
        throw ConfigError("config: [analysis] rate tail band must satisfy 0 < lo < hi");
    }
    if (cfg.analysis.rescale_window <= 0 || cfg.analysis.compare_window <= 0) {
        throw ConfigError("config: [analysis] windows must be positive");
    }
    if (!(cfg.analysis.eps_t_fraction > 0 && cfg.analysis.eps_t_fraction < 1)) {
        throw ConfigError("config: [analysis] eps_t_fraction must lie in (0, 1)");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string fmt(Scalar x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string fmt_or_auto(Scalar x, Scalar sentinel) {
    return x == sentinel || (x <= 0 && sentinel <= 0) ? std::string("auto") : fmt(x);
}

}  // namespace

std::string echo_config(const RunConfig& c) {
    std::ostringstream out;
    out << "[grid]\n"
        << "a = " << fmt(c.grid_a) << "\n"
        << "b = " << fmt(c.grid_b) << "\n"
        << "n = " << c.grid_n << "\n\n";

    out << "[preset]\n"
        << "kind = " << preset_kind_name(c.preset.kind) << "\n";
    for (const auto& [k, v] : c.preset.params) out << k << " = " << fmt(v) << "\n";
    if (!c.preset_file.empty()) out << "file = " << c.preset_file << "\n";
    out << "\n";

    const auto& ct = c.controls;
    out << "[controls]\n"
        << "scheme = " << scheme_name(ct.scheme) << "\n"
        << "safety = " << fmt(ct.safety) << "\n"
        << "rho_stop = " << fmt_or_auto(ct.rho_stop, -1) << "\n"
        << "t_max = " << fmt(ct.t_max) << "\n"
        << "regrid_factor = " << ct.regrid_factor << "\n"
        << "regrid_trigger = " << fmt(ct.regrid_trigger) << "\n"
        << "snapshot_stride = " << ct.snapshot_stride << "\n"
        << "max_nodes = " << ct.max_nodes << "\n"
        << "wall_clock_budget = " << fmt(ct.wall_clock_budget) << "\n\n";

    const auto& m = c.monitors;
    out << "[monitors]\n"
        << "enabled = " << (c.monitors_enabled ? "true" : "false") << "\n"
        << "c = " << fmt(m.c) << "\n"
        << "mu = " << fmt(m.mu) << "\n"
        << "lambda = " << fmt_or_auto(m.lambda, -1) << "\n"
        << "pinned_cap = " << fmt_or_auto(m.pinned_cap, -1) << "\n"
        << "c0 = " << fmt(m.c0) << "\n"
        << "tol_growth = " << fmt(m.tol_growth) << "\n"
        << "extended_identities = " << (m.extended_identities ? "true" : "false") << "\n\n";

    const auto& a = c.analysis;
    out << "[analysis]\n"
        << "enabled = " << (c.analysis_enabled ? "true" : "false") << "\n"
        << "fit_window_fraction = " << fmt(a.fit_window_fraction) << "\n"
        << "rate_cap = " << fmt(a.rate_cap) << "\n"
        << "rate_tail_lo = " << fmt(a.rate_tail_lo) << "\n"
        << "rate_tail_hi = " << fmt(a.rate_tail_hi) << "\n"
        << "i_max = " << a.i_max << "\n"
        << "rescale_window = " << fmt(a.rescale_window) << "\n"
        << "compare_window = " << fmt(a.compare_window) << "\n"
        << "eps_x = " << fmt_or_auto(a.eps_x, -1) << "\n"
        << "eps_t_fraction = " << fmt(a.eps_t_fraction) << "\n\n";

    out << "[output]\n"
        << "dir = " << c.output_dir << "\n"
        << "seed = " << c.seed << "\n";
    return out.str();
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        throw ConfigError("override '" + key + "' must be section.key");
    }
    std::string text = echo_config(config);
    // Re-parse with the single key replaced; keeps every validation path.
    const std::string section = key.substr(0, dot);
    const std::string bare = key.substr(dot + 1);
    std::istringstream in(text);
    std::ostringstream out;
    std::string line, cur;
    bool replaced = false;
    while (std::getline(in, line)) {
        std::string s = trim(line);
        if (!s.empty() && s.front() == '[' && s.back() == ']') cur = s.substr(1, s.size() - 2);
        const auto eq = s.find('=');
        if (cur == section && eq != std::string::npos && trim(s.substr(0, eq)) == bare) {
            out << bare << " = " << value << "\n";
            replaced = true;
        } else {
            out << line << "\n";
        }
    }
    if (!replaced) {
        throw ConfigError("override '" + key + "' does not name an existing config key");
    }
    config = parse_config(out.str());
}

}  // namespace neckflow
