#include "neckflow/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace neckflow {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string format_scalar(Scalar x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

Scalar parse_scalar(const std::string& s) {
    Scalar x;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw IoError("malformed number '" + s + "'");
    }
    return x;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() +
                              ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << bytes;
    if (!out.good()) throw IoError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string snapshot_csv(const FlowState& state, const GeometrySample& g) {
    std::string out = "x,rho,drho,ddrho,v,p,q,k,H,A2\n";
    for (Index j = 0; j < state.grid.n; ++j) {
        out += format_scalar(state.grid.nodes[j]);
        out += ',';
        out += format_scalar(state.rho[j]);
        out += ',';
        out += format_scalar(g.dr[j]);
        out += ',';
        out += format_scalar(g.ddr[j]);
        out += ',';
        out += format_scalar(g.v[j]);
        out += ',';
        out += format_scalar(g.p[j]);
        out += ',';
        out += format_scalar(g.q[j]);
        out += ',';
        out += format_scalar(g.k[j]);
        out += ',';
        out += format_scalar(g.H[j]);
        out += ',';
        out += format_scalar(g.A2[j]);
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

}  // namespace

FlowState snapshot_from_csv(const std::string& bytes, Scalar t) {
    std::istringstream in(bytes);
    std::string line;
    if (!std::getline(in, line)) throw IoError("snapshot csv: empty");
    std::vector<Scalar> xs, rs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() < 2) throw IoError("snapshot csv: short row '" + line + "'");
        xs.push_back(parse_scalar(fields[0]));
        rs.push_back(parse_scalar(fields[1]));
    }
    if (xs.size() < 5) throw IoError("snapshot csv: fewer than 5 nodes");

    FlowState state;
    state.t = t;
    state.grid.a = xs.front();
    state.grid.b = xs.back();
    state.grid.n = static_cast<Index>(xs.size());
    state.grid.h = (state.grid.b - state.grid.a) / static_cast<Scalar>(state.grid.n - 1);
    state.grid.nodes = Eigen::Map<const Array>(xs.data(), state.grid.n);
    state.rho = Eigen::Map<const Array>(rs.data(), state.grid.n);
    validate_state(state);
    return state;
}

std::string summary_csv(const Trajectory& traj) {
    std::string out = "t,n,h,min_rho,max_rho,max_A2,min_H,max_H,max_yv\n";
    for (const auto& snap : traj.snapshots) {
        const auto& g = snap.sample;
        out += format_scalar(snap.state.t);
        out += ',';
        out += std::to_string(snap.state.grid.n);
        out += ',';
        out += format_scalar(snap.state.grid.h);
        out += ',';
        out += format_scalar(snap.state.rho.minCoeff());
        out += ',';
        out += format_scalar(snap.state.rho.maxCoeff());
        out += ',';
        out += format_scalar(g.A2.maxCoeff());
        out += ',';
        out += format_scalar(g.H.minCoeff());
        out += ',';
        out += format_scalar(g.H.maxCoeff());
        out += ',';
        out += format_scalar((g.y * g.v).maxCoeff());
        out += '\n';
    }
    return out;
}

std::string events_csv(const std::vector<TrajectoryEvent>& events) {
    std::string out = "kind,t,detail\n";
    for (const auto& e : events) {
        out += event_kind_name(e.kind);
        out += ',';
        out += format_scalar(e.t);
        out += ',';
        out += e.detail;
        out += '\n';
    }
    return out;
}

std::string monitor_csv(const MonitorSeries& series) {
    std::string out = "t,value,bound,violated\n";
    for (size_t i = 0; i < series.t.size(); ++i) {
        bool violated = false;
        for (const auto& v : series.violations) {
            if (v.t == series.t[i]) violated = true;
        }
        out += format_scalar(series.t[i]);
        out += ',';
        out += std::isnan(series.value[i]) ? std::string("") : format_scalar(series.value[i]);
        out += ',';
        out += std::isnan(series.bound[i]) ? std::string("") : format_scalar(series.bound[i]);
        out += ',';
        out += violated ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string rescaled_csv(const FlowState& rescaled) {
    const GeometrySample g = geometry_sample(rescaled);
    std::string out = "x_tilde,rho_tilde,H_tilde,A_tilde\n";
    for (Index j = 0; j < rescaled.grid.n; ++j) {
        out += format_scalar(rescaled.grid.nodes[j]);
        out += ',';
        out += format_scalar(rescaled.rho[j]);
        out += ',';
        out += format_scalar(g.H[j]);
        out += ',';
        out += format_scalar(std::sqrt(g.A2[j]));
        out += '\n';
    }
    return out;
}

void save_trajectory(const fs::path& dir, const Trajectory& traj) {
    std::string index = "i,t,n,h,file\n";
    for (size_t i = 0; i < traj.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "snap_%05zu.csv", i);
        const auto& snap = traj.snapshots[i];
        write_file(dir / "snapshots" / name, snapshot_csv(snap.state, snap.sample));
        index += std::to_string(i);
        index += ',';
        index += format_scalar(snap.state.t);
        index += ',';
        index += std::to_string(snap.state.grid.n);
        index += ',';
        index += format_scalar(snap.state.grid.h);
        index += ',';
        index += name;
        index += '\n';
    }
    write_file(dir / "snapshots" / "index.csv", index);
    write_file(dir / "events.csv", events_csv(traj.events));
    write_file(dir / "summary.csv", summary_csv(traj));
}

Trajectory load_trajectory(const fs::path& dir, const StepControls& controls) {
    Trajectory traj;
    traj.controls = controls;

    const std::string index = read_file(dir / "snapshots" / "index.csv");
    std::istringstream in(index);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 5) throw IoError("trajectory index: bad row '" + line + "'");
        const Scalar t = parse_scalar(fields[1]);
        FlowState state = snapshot_from_csv(read_file(dir / "snapshots" / fields[4]), t);
        GeometrySample sample = geometry_sample(state);
        traj.snapshots.push_back(Snapshot{std::move(state), std::move(sample)});
    }

    const std::string events = read_file(dir / "events.csv");
    std::istringstream ein(events);
    std::getline(ein, line);
    while (std::getline(ein, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() < 2) throw IoError("events csv: bad row '" + line + "'");
        TrajectoryEvent e;
        e.kind = event_kind_from_name(fields[0]);
        e.t = parse_scalar(fields[1]);
        e.detail = fields.size() > 2 ? fields[2] : "";
        traj.events.push_back(e);
    }
    return traj;
}

std::string singularity_json(const SingularityReport& rep) {
    json j;
    j["verdict"] = verdict_name(rep.verdict);
    if (rep.fit) {
        j["T_est"] = rep.fit->T_est;
        j["T_uncertainty"] = rep.fit->uncertainty;
        j["fit_slope"] = rep.fit->slope;
        j["fit_intercept"] = rep.fit->intercept;
        j["fit_r2"] = rep.fit->r2;
        j["fit_points"] = rep.fit->points_used;
        j["fit_window"] = {rep.fit->window_t0, rep.fit->window_t1};
        j["poor_linearity"] = rep.fit->poor_linearity();
    }
    j["x_star"] = rep.x_star;
    j["rate_constant"] = rep.rate_constant;
    j["rate_tail"] = rep.rate_tail;
    j["ratio_bound"] = rep.ratio_bound;
    j["max_H_window"] = rep.max_H_window;
    j["neighborhood"] = {{"x_lo", rep.window.x_lo},
                         {"x_hi", rep.window.x_hi},
                         {"t_lo", rep.window.t_lo},
                         {"t_hi", rep.window.t_hi}};
    j["rescaling_sufficient"] = rep.rescaling_sufficient;
    j["rescaling"] = json::array();
    for (const auto& p : rep.rescaling) {
        j["rescaling"].push_back(
            {{"i", p.i}, {"t", p.t}, {"x", p.x}, {"alpha", p.alpha}, {"snapshot", p.snapshot}});
    }
    j["cylinder_comparisons"] = json::array();
    for (const auto& c : rep.comparisons) {
        j["cylinder_comparisons"].push_back({{"i", c.i},
                                             {"deviation", c.cylinder.sup_abs},
                                             {"window", c.cylinder.window_used},
                                             {"clipped", c.cylinder.clipped}});
    }
    if (rep.catenoid) {
        j["catenoid_fit"] = {{"c", rep.catenoid->c},
                             {"rms_residual", rep.catenoid->rms_residual},
                             {"yv_growth", rep.catenoid->yv_growth},
                             {"converged", rep.catenoid->converged}};
    }
    return j.dump(2) + "\n";
}

std::string monitor_verdict_json(const MonitorSuite& suite) {
    json j;
    json monitors = json::object();
    for (const auto& s : suite.series) {
        json entry;
        entry["pass"] = s.pass();
        entry["violations"] = s.violations.size();
        entry["bound"] = s.bound_provenance;
        if (!s.violations.empty()) {
            const auto& v = s.violations.front();
            entry["first_violation"] = {{"t", v.t}, {"node", v.node}, {"value", v.value},
                                        {"bound", v.bound}};
        }
        monitors[s.name] = entry;
    }
    j["monitors"] = monitors;
    j["all_pass"] = suite.all_pass();
    if (!suite.residuals.t_spatial.empty()) {
        Scalar worst = 0;
        for (Scalar r : suite.residuals.spatial_interior) worst = std::max(worst, r);
        j["spatial_identity_max_residual"] = worst;
    }
    if (!suite.residuals.t_mc.empty()) {
        Scalar worst = 0;
        for (Scalar r : suite.residuals.mc_interior) worst = std::max(worst, r);
        j["mean_curvature_identity_max_residual"] = worst;
    }
    return j.dump(2) + "\n";
}

void write_manifest(const fs::path& dir, const RunConfig& config, const Trajectory& traj,
                    const ManifestInfo& info) {
    json j;
    j["tool"] = {{"name", "neckflow"}, {"version", "0.1.0"}};
    j["started_utc"] = info.started_utc;
    j["finished_utc"] = info.finished_utc;
    j["exit_status"] = info.exit_status;
    j["config"] = echo_config(config);
    j["events"] = json::array();
    for (const auto& e : traj.events) {
        j["events"].push_back({{"kind", event_kind_name(e.kind)}, {"t", e.t},
                               {"detail", e.detail}});
    }

    json files = json::array();
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename() == "manifest.json") continue;
        paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        const std::string bytes = read_file(p);
        files.push_back({{"path", fs::relative(p, dir).generic_string()},
                         {"bytes", bytes.size()},
                         {"fnv1a64", fnv1a64_hex(bytes)}});
    }
    j["files"] = files;
    write_file(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace neckflow
