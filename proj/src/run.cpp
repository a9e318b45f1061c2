#include "neckflow/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <thread>

namespace neckflow {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

fs::path resolve_output_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv("NECKFLOW_OUT_ROOT")) {
        return fs::path(root) / p;
    }
    return p;
}

int cmd_run(const RunConfig& config) {
    const fs::path dir = resolve_output_dir(config.output_dir);
    ManifestInfo info;
    info.started_utc = utc_now();

    Trajectory traj;
    try {
        const FlowState initial = config.initial_state();
        traj = evolve(initial, config.controls);
    } catch (const NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    }

    int exit_code = kExitOk;
    try {
        write_file(dir / "config.echo.cfg", echo_config(config));
        save_trajectory(dir, traj);

        std::optional<ExtinctionFit> fit;
        SingularityReport report;
        if (config.analysis_enabled) {
            fit = estimate_extinction(traj, config.analysis.fit_window_fraction);
            report = classify(traj, fit, config.analysis);
            write_file(dir / "singularity.json", singularity_json(report));
            for (const auto& p : report.rescaling) {
                try {
                    FlowState rs = rescale_profile(traj.snapshots[p.snapshot].state, p.x,
                                                   p.alpha, config.analysis.rescale_window);
                    char name[32];
                    std::snprintf(name, sizeof(name), "point_%02d.csv", p.i);
                    write_file(dir / "rescaled" / name, rescaled_csv(rs));
                } catch (const InputError&) {
                    // Under-resolved point; the report already skipped it.
                }
            }
        }

        if (config.monitors_enabled) {
            std::optional<BlowupWindow> window;
            if (config.analysis_enabled && traj.pinch_detected() && fit) {
                window = report.window;
            }
            MonitorSuite suite = run_monitors(traj, config.monitors, window);
            for (const auto& s : suite.series) {
                write_file(dir / "monitors" / (s.name + ".csv"), monitor_csv(s));
            }
            write_file(dir / "monitors" / "verdict.json", monitor_verdict_json(suite));
            if (!suite.all_pass()) exit_code = kExitMonitorViolation;
        }
    } catch (const IoError& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return kExitIoFailure;
    } catch (const NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    }

    info.finished_utc = utc_now();
    info.exit_status = exit_code;
    try {
        write_manifest(dir, config, traj, info);
    } catch (const IoError& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return kExitIoFailure;
    }
    return exit_code;
}

int cmd_analyze(const fs::path& run_dir) {
    if (!fs::exists(run_dir / "manifest.json")) {
        std::cerr << "analyze: no manifest in " << run_dir << " (incomplete run)\n";
        return kExitNoManifest;
    }
    try {
        const RunConfig config = parse_config(read_file(run_dir / "config.echo.cfg"));
        const Trajectory traj = load_trajectory(run_dir, config.controls);

        const auto fit = estimate_extinction(traj, config.analysis.fit_window_fraction);
        const SingularityReport report = classify(traj, fit, config.analysis);
        write_file(run_dir / "analysis" / "singularity.json", singularity_json(report));

        std::optional<BlowupWindow> window;
        if (traj.pinch_detected() && fit) window = report.window;
        const MonitorSuite suite = run_monitors(traj, config.monitors, window);
        for (const auto& s : suite.series) {
            write_file(run_dir / "analysis" / "monitors" / (s.name + ".csv"), monitor_csv(s));
        }
        write_file(run_dir / "analysis" / "monitors" / "verdict.json",
                   monitor_verdict_json(suite));
        return suite.all_pass() ? kExitOk : kExitMonitorViolation;
    } catch (const IoError& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return kExitIoFailure;
    } catch (const NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
}

int cmd_report(const fs::path& run_dir) {
    if (!fs::exists(run_dir / "manifest.json")) {
        std::cerr << "report: no manifest in " << run_dir << " (incomplete run)\n";
        return kExitNoManifest;
    }
    try {
        const RunConfig config = parse_config(read_file(run_dir / "config.echo.cfg"));
        const Trajectory traj = load_trajectory(run_dir, config.controls);
        const auto fit = estimate_extinction(traj, config.analysis.fit_window_fraction);
        const SingularityReport report = classify(traj, fit, config.analysis);
        const fs::path out = run_dir / "report";

        // Profile waterfall at up to 12 sampled snapshot times.
        {
            std::string csv = "t,x,rho\n";
            const size_t total = traj.snapshots.size();
            const size_t samples = std::min<size_t>(12, total);
            for (size_t k = 0; k < samples; ++k) {
                const size_t i = samples == 1 ? 0 : k * (total - 1) / (samples - 1);
                const auto& snap = traj.snapshots[i];
                for (Index j = 0; j < snap.state.grid.n; ++j) {
                    csv += format_scalar(snap.state.t);
                    csv += ',';
                    csv += format_scalar(snap.state.grid.nodes[j]);
                    csv += ',';
                    csv += format_scalar(snap.state.rho[j]);
                    csv += '\n';
                }
            }
            write_file(out / "waterfall.csv", csv);
        }

        // log-log blow-up track against the reference slope -1.
        if (fit) {
            std::string csv = "t,T_minus_t,max_A2,log10_T_minus_t,log10_max_A2,reference\n";
            for (const auto& snap : traj.snapshots) {
                const Scalar gap = fit->T_est - snap.state.t;
                if (gap <= 0) continue;
                const Scalar a2 = snap.sample.A2.maxCoeff();
                csv += format_scalar(snap.state.t);
                csv += ',';
                csv += format_scalar(gap);
                csv += ',';
                csv += format_scalar(a2);
                csv += ',';
                csv += format_scalar(std::log10(gap));
                csv += ',';
                csv += format_scalar(std::log10(a2));
                csv += ',';
                csv += format_scalar(std::log10(Scalar(0.5) / gap));
                csv += '\n';
            }
            write_file(out / "loglog.csv", csv);
        }

        // Rescaled overlays against the unit cylinder.
        {
            std::string csv = "i,x_tilde,rho_tilde,deviation\n";
            for (const auto& p : report.rescaling) {
                try {
                    FlowState rs = rescale_profile(traj.snapshots[p.snapshot].state, p.x,
                                                   p.alpha, config.analysis.rescale_window);
                    for (Index j = 0; j < rs.grid.n; ++j) {
                        csv += std::to_string(p.i);
                        csv += ',';
                        csv += format_scalar(rs.grid.nodes[j]);
                        csv += ',';
                        csv += format_scalar(rs.rho[j]);
                        csv += ',';
                        csv += format_scalar(std::abs(rs.rho[j] - Scalar(1)));
                        csv += '\n';
                    }
                } catch (const InputError&) {
                }
            }
            write_file(out / "overlay.csv", csv);
        }

        // Plain-text digest.
        {
            std::ostringstream txt;
            txt << "neckflow run report\n";
            txt << "snapshots: " << traj.snapshots.size() << "\n";
            txt << "pinch detected: " << (traj.pinch_detected() ? "yes" : "no") << "\n";
            if (fit) {
                txt << "T_est: " << format_scalar(fit->T_est) << " +- "
                    << format_scalar(fit->uncertainty) << "\n";
                txt << "fit slope of 1/max|A|^2: " << format_scalar(fit->slope)
                    << " (shrinking cylinder: -2)\n";
                txt << "fit R^2: " << format_scalar(fit->r2) << "\n";
                txt << "verdict: " << verdict_name(report.verdict) << "\n";
                txt << "rate constant: " << format_scalar(report.rate_constant)
                    << ", tail: " << format_scalar(report.rate_tail) << "\n";
                txt << "blow-up location x*: " << format_scalar(report.x_star) << "\n";
                if (report.catenoid) {
                    txt << "catenoid fit at final point: c=" << format_scalar(report.catenoid->c)
                        << " rms=" << format_scalar(report.catenoid->rms_residual) << "\n";
                }
                for (const auto& cset : report.comparisons) {
                    txt << "cylinder deviation i=" << cset.i << ": "
                        << format_scalar(cset.cylinder.sup_abs) << "\n";
                }
            } else {
                txt << "no extinction estimate (run did not pinch)\n";
            }
            write_file(out / "summary.txt", txt.str());
        }
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return kExitIoFailure;
    }
}

namespace {

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    }
    return out;
}

struct SweepCase {
    RunConfig config;
    std::string label;
    int exit_code = 0;
};

}  // namespace

int cmd_sweep(const RunConfig& base, const std::vector<SweepAxis>& axes) {
    std::vector<SweepCase> cases;
    cases.push_back({base, "", 0});
    for (const auto& axis : axes) {
        if (axis.values.empty()) throw ConfigError("sweep axis '" + axis.key + "' has no values");
        std::vector<SweepCase> next;
        for (const auto& c : cases) {
            for (const auto& v : axis.values) {
                SweepCase nc = c;
                apply_override(nc.config, axis.key, v);
                nc.label += (nc.label.empty() ? "" : "_") + sanitize(axis.key) + "-" + sanitize(v);
                next.push_back(std::move(nc));
            }
        }
        cases = std::move(next);
    }

    const fs::path root = resolve_output_dir(base.output_dir);
    for (auto& c : cases) {
        const std::string sub = c.label.empty() ? "single" : c.label;
        c.config.output_dir = (root / sub).string();
    }

    // Children are fully isolated; run them on a small pool.
    const unsigned pool = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                          static_cast<unsigned>(cases.size())));
    std::vector<std::thread> workers;
    std::atomic<size_t> cursor{0};
    for (unsigned w = 0; w < pool; ++w) {
        workers.emplace_back([&]() {
            while (true) {
                const size_t i = cursor.fetch_add(1);
                if (i >= cases.size()) return;
                cases[i].exit_code = cmd_run(cases[i].config);
            }
        });
    }
    for (auto& th : workers) th.join();

    // Cross-run summary. When three or more runs refine grid.n by a fixed
    // factor, successive Richardson triples give a convergence order for
    // T_est with no exact value needed.
    std::string csv = "case,exit,n,T_est,T_uncertainty,fit_slope,rate_constant,rate_tail,verdict\n";
    std::vector<std::pair<Index, Scalar>> n_vs_T;
    int worst = 0;
    for (const auto& c : cases) {
        worst = std::max(worst, c.exit_code);
        csv += c.label.empty() ? "single" : c.label;
        csv += ',';
        csv += std::to_string(c.exit_code);
        csv += ',';
        csv += std::to_string(c.config.grid_n);
        std::string t_est = "", unc = "", slope = "", rc = "", rt = "", verdict = "";
        try {
            const fs::path sj = fs::path(c.config.output_dir) / "singularity.json";
            if (fs::exists(sj)) {
                const RunConfig cc = parse_config(read_file(
                    fs::path(c.config.output_dir) / "config.echo.cfg"));
                const Trajectory traj = load_trajectory(c.config.output_dir, cc.controls);
                const auto fit = estimate_extinction(traj, cc.analysis.fit_window_fraction);
                if (fit) {
                    const SingularityReport rep = classify(traj, fit, cc.analysis);
                    t_est = format_scalar(fit->T_est);
                    unc = format_scalar(fit->uncertainty);
                    slope = format_scalar(fit->slope);
                    rc = format_scalar(rep.rate_constant);
                    rt = format_scalar(rep.rate_tail);
                    verdict = verdict_name(rep.verdict);
                    n_vs_T.push_back({cc.grid_n, fit->T_est});
                }
            }
        } catch (const std::exception&) {
            // Leave the row blank; the child exit code already records failure.
        }
        csv += ',' + t_est + ',' + unc + ',' + slope + ',' + rc + ',' + rt + ',' + verdict + '\n';
    }

    std::string orders = "n_coarse,n_mid,n_fine,T_order\n";
    std::sort(n_vs_T.begin(), n_vs_T.end());
    for (size_t i = 0; i + 2 < n_vs_T.size(); ++i) {
        const Scalar d1 = std::abs(n_vs_T[i].second - n_vs_T[i + 1].second);
        const Scalar d2 = std::abs(n_vs_T[i + 1].second - n_vs_T[i + 2].second);
        if (d1 > 0 && d2 > 0) {
            const Scalar hr = Scalar(n_vs_T[i + 1].first - 1) / Scalar(n_vs_T[i].first - 1);
            orders += std::to_string(n_vs_T[i].first) + ',' +
                      std::to_string(n_vs_T[i + 1].first) + ',' +
                      std::to_string(n_vs_T[i + 2].first) + ',' +
                      format_scalar(std::log(d1 / d2) / std::log(hr)) + '\n';
        }
    }

    try {
        write_file(root / "sweep_summary.csv", csv);
        if (n_vs_T.size() >= 3) write_file(root / "sweep_orders.csv", orders);
    } catch (const IoError& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return kExitIoFailure;
    }
    return worst;
}

}  // namespace neckflow
