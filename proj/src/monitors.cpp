#include "neckflow/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace neckflow {

namespace {

constexpr Scalar kNaN = std::numeric_limits<Scalar>::quiet_NaN();
constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

bool same_grid(const Snapshot& a, const Snapshot& b) {
    return a.state.grid.n == b.state.grid.n;
}

}  // namespace

RegionSlice region_negative_H(const GeometrySample& sample, Scalar c) {
    if (!(c > 0)) throw ConfigError("region threshold c must be positive");
    RegionSlice slice;
    const Index n = sample.H.size();
    std::vector<char> in(n, 0);
    for (Index j = 0; j < n; ++j) {
        if (sample.H[j] < -c) {
            in[j] = 1;
            slice.omega.push_back(j);
        }
    }
    for (Index j = 0; j < n; ++j) {
        if (in[j]) continue;
        const bool left = j > 0 && in[j - 1];
        const bool right = j < n - 1 && in[j + 1];
        if (left || right) slice.gamma.push_back(j);
    }
    return slice;
}

RegionTrack track_regions(const Trajectory& traj, Scalar c) {
    RegionTrack track;
    track.c = c;
    track.slices.reserve(traj.snapshots.size());
    for (const auto& snap : traj.snapshots) {
        track.slices.push_back(region_negative_H(snap.sample, c));
    }
    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        const Scalar t = traj.snapshots[s].state.t;
        const auto& cur = track.slices[s];
        if (s == 0) {
            for (Index j : cur.omega) track.events.push_back({t, j, true});
            continue;
        }
        const auto& prevsnap = traj.snapshots[s - 1];
        if (!same_grid(prevsnap, traj.snapshots[s]) ||
            !traj.same_grid_between(prevsnap.state.t, t)) {
            // Fresh membership after a regrid: all members count as entries.
            for (Index j : cur.omega) track.events.push_back({t, j, true});
            continue;
        }
        const auto& prev = track.slices[s - 1];
        std::vector<char> was(traj.snapshots[s].state.grid.n, 0);
        for (Index j : prev.omega) was[j] = 1;
        std::vector<char> now(traj.snapshots[s].state.grid.n, 0);
        for (Index j : cur.omega) now[j] = 1;
        for (Index j : cur.omega) {
            if (!was[j]) track.events.push_back({t, j, true});
        }
        for (Index j : prev.omega) {
            if (!now[j]) track.events.push_back({t, j, false});
        }
    }
    return track;
}

MonitorSeries monitor_height_bound(const Trajectory& traj, Scalar c) {
    RegionTrack track = track_regions(traj, c);

    MonitorSeries series;
    series.name = "height_bound";
    series.kind = MonitorSeries::BoundKind::lower;
    series.bound_provenance = "running infimum of y over region entries and boundary markers";

    Scalar gamma_inf = kInf;
    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        const auto& snap = traj.snapshots[s];
        const Scalar t = snap.state.t;
        const Scalar h = snap.state.grid.h;
        const auto& slice = track.slices[s];

        // Entries at this snapshot feed the running boundary infimum first.
        for (const auto& ev : track.events) {
            if (ev.entered && ev.t == t) gamma_inf = std::min(gamma_inf, snap.sample.y[ev.node]);
        }
        for (Index j : slice.gamma) gamma_inf = std::min(gamma_inf, snap.sample.y[j]);

        series.t.push_back(t);
        if (slice.omega.empty()) {
            series.value.push_back(kNaN);
            series.bound.push_back(kNaN);
            continue;
        }
        Scalar inf_y = kInf;
        Index arg = slice.omega.front();
        for (Index j : slice.omega) {
            if (snap.sample.y[j] < inf_y) {
                inf_y = snap.sample.y[j];
                arg = j;
            }
        }
        const Scalar dt_gap = s > 0 ? t - traj.snapshots[s - 1].state.t : Scalar(0);
        const Scalar tol = 10 * h * h + dt_gap;
        const Scalar bound = gamma_inf - tol;
        series.value.push_back(inf_y);
        series.bound.push_back(bound);
        if (inf_y < bound) series.violations.push_back({t, arg, inf_y, bound});

        // Material increase for nodes staying inside the region.
        if (s > 0 && same_grid(traj.snapshots[s - 1], snap) &&
            traj.same_grid_between(traj.snapshots[s - 1].state.t, t)) {
            const auto& prev_slice = track.slices[s - 1];
            std::vector<char> was(snap.state.grid.n, 0);
            for (Index j : prev_slice.omega) was[j] = 1;
            for (Index j : slice.omega) {
                if (!was[j]) continue;
                const Scalar before = traj.snapshots[s - 1].sample.y[j];
                const Scalar after = snap.sample.y[j];
                if (after < before - tol) {
                    series.violations.push_back({t, j, after, before - tol});
                }
            }
        }
    }
    return series;
}

MonitorSeries monitor_yv(const Trajectory& traj, Scalar tol_growth) {
    MonitorSeries series;
    series.name = "yv";
    series.kind = MonitorSeries::BoundKind::upper;

    Scalar initial_max = 0;
    if (!traj.snapshots.empty()) {
        const auto& g0 = traj.snapshots.front().sample;
        initial_max = (g0.y * g0.v).maxCoeff();
    }
    const Scalar bound = (1 + tol_growth) * initial_max;
    series.bound_provenance = "initial-data maximum of y v, tolerance " + std::to_string(tol_growth);

    for (const auto& snap : traj.snapshots) {
        Index arg;
        const Scalar val = (snap.sample.y * snap.sample.v).maxCoeff(&arg);
        series.t.push_back(snap.state.t);
        series.value.push_back(val);
        series.bound.push_back(bound);
        if (val > bound) series.violations.push_back({snap.state.t, arg, val, bound});
    }
    return series;
}

std::pair<MonitorSeries, MonitorSeries> monitor_curvature_ratios(const Trajectory& traj, Scalar c) {
    if (!(c > 0)) throw ConfigError("curvature ratio monitor: band constant c must be positive");

    MonitorSeries ratio, abs_ratio;
    ratio.name = "k_over_p";
    abs_ratio.name = "abs_k_over_p";
    ratio.kind = abs_ratio.kind = MonitorSeries::BoundKind::upper;

    Scalar init_kp = -kInf, init_yv = 0;
    if (!traj.snapshots.empty()) {
        const auto& g0 = traj.snapshots.front().sample;
        init_kp = (g0.k / g0.p).maxCoeff();
        init_yv = (g0.y * g0.v).maxCoeff();
    }
    const Scalar rel = Scalar(1e-2);
    const Scalar h0 = traj.snapshots.empty() ? Scalar(0) : traj.snapshots.front().state.grid.h;
    const Scalar abs_slack = 10 * h0 * h0;

    const Scalar base_kp = std::max(init_kp, Scalar(1));
    const Scalar bound_kp = base_kp * (1 + rel) + abs_slack;
    ratio.bound_provenance = "max(initial max k/p, 1) from the initial data";

    const Scalar yv_bound = (1 + rel) * init_yv;
    const Scalar base_abs = std::max({base_kp, Scalar(1), Scalar(1) + c * yv_bound});
    const Scalar bound_abs = base_abs * (1 + rel) + abs_slack;
    abs_ratio.bound_provenance =
        "max(initial k/p bound, 1, 1 + c * yv bound) composed from the initial data";

    for (const auto& snap : traj.snapshots) {
        const auto& g = snap.sample;
        Index arg1;
        const Scalar v1 = (g.k / g.p).maxCoeff(&arg1);
        ratio.t.push_back(snap.state.t);
        ratio.value.push_back(v1);
        ratio.bound.push_back(bound_kp);
        if (v1 > bound_kp) ratio.violations.push_back({snap.state.t, arg1, v1, bound_kp});

        Scalar v2 = -kInf;
        Index arg2 = -1;
        for (Index j = 0; j < g.H.size(); ++j) {
            if (g.H[j] >= 0 || std::abs(g.H[j]) <= c) {
                const Scalar r = std::abs(g.k[j]) / g.p[j];
                if (r > v2) {
                    v2 = r;
                    arg2 = j;
                }
            }
        }
        abs_ratio.t.push_back(snap.state.t);
        abs_ratio.value.push_back(arg2 >= 0 ? v2 : kNaN);
        abs_ratio.bound.push_back(bound_abs);
        if (arg2 >= 0 && v2 > bound_abs) {
            abs_ratio.violations.push_back({snap.state.t, arg2, v2, bound_abs});
        }
    }
    return {std::move(ratio), std::move(abs_ratio)};
}

Scalar pinned_phi(Scalar v2, Scalar lambda, Scalar mu) {
    return v2 / (lambda - mu * v2);
}

PinnedQuantityResult monitor_pinned_quantity(const Trajectory& traj, Scalar c, Scalar lambda,
                                             Scalar mu, Scalar cap) {
    if (!(mu > 0.75)) {
        throw ConfigError("pinned quantity monitor: mu must exceed 3/4 (got " +
                          std::to_string(mu) + ")");
    }
    PinnedQuantityResult out;
    out.g_series.name = "pinned_quantity";
    out.g_series.kind = MonitorSeries::BoundKind::upper;
    out.h_floor.name = "H_floor";
    out.h_floor.kind = MonitorSeries::BoundKind::lower;
    if (traj.snapshots.empty()) return out;

    const auto& g0 = traj.snapshots.front().sample;
    if (lambda <= 0) lambda = 4 * mu * g0.v.square().maxCoeff();

    auto g_of = [&](const GeometrySample& g, Index j) {
        return g.A2[j] * pinned_phi(g.v[j] * g.v[j], lambda, mu);
    };

    if (cap <= 0) {
        Scalar init_all = 0;
        for (Index j = 0; j < g0.A2.size(); ++j) init_all = std::max(init_all, g_of(g0, j));
        cap = 10 * init_all + 1;
    }

    RegionTrack track = track_regions(traj, c);

    // Initial region maximum of g (empty region contributes nothing).
    Scalar init_region = -kInf;
    for (Index j : track.slices.front().omega) init_region = std::max(init_region, g_of(g0, j));

    Scalar gamma_max = -kInf;
    Scalar running_bound_base = std::max(init_region, cap);
    const Scalar rel = Scalar(1e-2);

    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        const auto& snap = traj.snapshots[s];
        const auto& g = snap.sample;
        const Scalar t = snap.state.t;
        const auto& slice = track.slices[s];

        for (Index j : slice.gamma) gamma_max = std::max(gamma_max, g_of(g, j));
        const Scalar bound = std::max(running_bound_base, gamma_max) * (1 + rel);

        out.g_series.t.push_back(t);
        out.g_series.bound.push_back(bound);
        if (slice.omega.empty()) {
            out.g_series.value.push_back(kNaN);
        } else {
            Scalar val = -kInf;
            Index arg = slice.omega.front();
            for (Index j : slice.omega) {
                const Scalar v2 = g.v[j] * g.v[j];
                out.max_v2_region = std::max(out.max_v2_region, v2);
                if (lambda - mu * v2 <= 0) {
                    out.pole_flagged = true;
                    continue;
                }
                const Scalar gj = g_of(g, j);
                if (gj > val) {
                    val = gj;
                    arg = j;
                }
            }
            out.g_series.value.push_back(val);
            if (val > bound) out.g_series.violations.push_back({t, arg, val, bound});
        }
    }
    out.lambda_valid = lambda > mu * out.max_v2_region;
    out.g_series.bound_provenance =
        "max(initial region max, running boundary max, cap=" + std::to_string(cap) +
        "), lambda=" + std::to_string(lambda) + ", mu=" + std::to_string(mu);

    // Mean curvature floor implied by the |A|^2 cap: phi(v^2) >= phi(1), so
    // |A|^2 <= g_bound (lambda - mu) and H >= -sqrt(2 |A|^2 cap).
    const Scalar g_bound_final =
        out.g_series.bound.empty() ? cap : out.g_series.bound.back();
    const Scalar a2_cap = g_bound_final * (lambda - mu);
    const Scalar floor = -std::sqrt(2 * a2_cap);
    out.h_floor.bound_provenance = "-sqrt(2 * A2 cap), A2 cap = g bound * (lambda - mu)";
    for (const auto& snap : traj.snapshots) {
        Index arg;
        const Scalar val = snap.sample.H.minCoeff(&arg);
        out.h_floor.t.push_back(snap.state.t);
        out.h_floor.value.push_back(val);
        out.h_floor.bound.push_back(floor);
        if (val < floor) out.h_floor.violations.push_back({snap.state.t, arg, val, floor});
    }
    return out;
}

QOverHResult monitor_q_over_H(const Trajectory& traj, const BlowupWindow& window, Scalar c0) {
    QOverHResult out;
    out.series.name = "q_over_H";
    out.series.kind = MonitorSeries::BoundKind::upper;
    out.series.bound_provenance = "running max of |q|/H over the window's parabolic boundary";

    Scalar boundary_max = -kInf;
    bool first_slice_seen = false;

    for (const auto& snap : traj.snapshots) {
        const Scalar t = snap.state.t;
        if (t < window.t_lo || t > window.t_hi) continue;
        const auto& g = snap.sample;
        const Array& x = snap.state.grid.nodes;
        const Scalar h = snap.state.grid.h;

        std::vector<Index> inside;
        for (Index j = 0; j < g.H.size(); ++j) {
            if (x[j] < window.x_lo || x[j] > window.x_hi) continue;
            if (g.H[j] <= 0) {
                ++out.excluded_nodes;
                continue;
            }
            if (g.A2[j] / (g.H[j] * g.H[j]) > c0) ++out.hypothesis_violations;
            inside.push_back(j);
        }
        if (inside.size() < 3) continue;

        auto qh = [&](Index j) { return std::abs(g.q[j]) / g.H[j]; };

        if (!first_slice_seen) {
            // Initial slice of the parabolic boundary.
            for (Index j : inside) boundary_max = std::max(boundary_max, qh(j));
            first_slice_seen = true;
        }
        // Spatial edges of the window at every slice.
        boundary_max = std::max({boundary_max, qh(inside.front()), qh(inside.back())});

        Scalar val = -kInf;
        Index arg = inside[1];
        for (size_t s = 1; s + 1 < inside.size(); ++s) {
            const Scalar r = qh(inside[s]);
            if (r > val) {
                val = r;
                arg = inside[s];
            }
        }
        const Scalar bound = boundary_max + 10 * h * h;
        out.series.t.push_back(t);
        out.series.value.push_back(val);
        out.series.bound.push_back(bound);
        if (val > bound) out.series.violations.push_back({t, arg, val, bound});
        out.applicable = true;

        if (&snap == &traj.snapshots.back() ||
            snap.state.t == traj.snapshots.back().state.t) {
            // Chain check |q| <= const * p at the final usable slice,
            // meaningful where the profile curvature is non-positive.
            out.chain_bound = boundary_max;
            Scalar worst = 0;
            for (Index j : inside) {
                if (g.k[j] > 0) continue;
                worst = std::max(worst, std::abs(g.q[j]) - boundary_max * g.p[j]);
                out.chain_q_max = std::max(out.chain_q_max, std::abs(g.q[j]));
            }
            out.chain_ok = worst <= 10 * h * h;
        }
    }
    return out;
}

namespace {

Scalar interior_abs_max(const Array& r, Index margin) {
    const Index n = r.size();
    if (n <= 2 * margin) return 0;
    return r.segment(margin, n - 2 * margin).abs().maxCoeff();
}

// Central x-derivative of an even-mirroring scalar.
Array ddx_even(const Array& f, Scalar h) {
    const Index n = f.size();
    Array ext(n + 2);
    ext[0] = f[1];
    ext.segment(1, n) = f;
    ext[n + 1] = f[n - 2];
    return (ext.segment(2, n) - ext.segment(0, n)) / (2 * h);
}

}  // namespace

ResidualRecord residual_evolution_identities(const Trajectory& traj, bool extended) {
    ResidualRecord rec;

    for (const auto& snap : traj.snapshots) {
        const auto& g = snap.sample;
        const Array resid =
            laplace_beltrami(snap.state, g.y) - g.y.inverse() + g.H / g.v;
        rec.t_spatial.push_back(snap.state.t);
        rec.spatial_max.push_back(resid.abs().maxCoeff());
        rec.spatial_interior.push_back(interior_abs_max(resid, 2));
    }

    for (size_t s = 1; s + 1 < traj.snapshots.size(); ++s) {
        const auto& prev = traj.snapshots[s - 1];
        const auto& cur = traj.snapshots[s];
        const auto& next = traj.snapshots[s + 1];
        if (!same_grid(prev, cur) || !same_grid(cur, next)) continue;
        if (!traj.same_grid_between(prev.state.t, next.state.t)) continue;

        const Scalar h = cur.state.grid.h;
        const Scalar span = next.state.t - prev.state.t;
        if (!(span > 0)) continue;
        const auto& g = cur.sample;

        auto lagrangian_residual = [&](const Array& f_prev, const Array& f_cur,
                                       const Array& f_next, const Array& rhs_terms) {
            const Array df_dt = (f_next - f_prev) / span;
            const Array advect = (g.H * g.dr / g.v) * ddx_even(f_cur, h);
            return Array(df_dt + advect - laplace_beltrami(cur.state, f_cur) - rhs_terms);
        };

        {
            const Array resid = lagrangian_residual(prev.sample.H, g.H, next.sample.H,
                                                    Array(g.A2 * g.H));
            rec.t_mc.push_back(cur.state.t);
            rec.mc_max.push_back(resid.abs().maxCoeff());
            rec.mc_interior.push_back(interior_abs_max(resid, 2));
        }

        if (extended) {
            const Array grad_v = ddx_even(g.v, h) / g.v;
            const Array rhs_v = -g.A2 * g.v + g.v / g.y.square() - 2 * grad_v.square() / g.v;
            const Array rhs_k = g.A2 * g.k - 2 * g.q.square() * (g.k - g.p);
            const Array rhs_p = g.A2 * g.p + 2 * g.q.square() * (g.k - g.p);
            const Array rhs_q = g.A2 * g.q + g.q * (g.p.square() - g.q.square() - 2 * g.k * g.p);
            rec.t_ext.push_back(cur.state.t);
            rec.ext_interior.push_back({
                interior_abs_max(lagrangian_residual(prev.sample.v, g.v, next.sample.v, rhs_v), 2),
                interior_abs_max(lagrangian_residual(prev.sample.k, g.k, next.sample.k, rhs_k), 2),
                interior_abs_max(lagrangian_residual(prev.sample.p, g.p, next.sample.p, rhs_p), 2),
                interior_abs_max(lagrangian_residual(prev.sample.q, g.q, next.sample.q, rhs_q), 2),
            });
        }
    }
    return rec;
}

bool MonitorSuite::all_pass() const {
    for (const auto& s : series) {
        if (!s.pass()) return false;
    }
    return true;
}

MonitorSuite run_monitors(const Trajectory& traj, const MonitorSettings& settings,
                          const std::optional<BlowupWindow>& window) {
    MonitorSuite suite;
    suite.series.push_back(monitor_height_bound(traj, settings.c));
    suite.series.push_back(monitor_yv(traj, settings.tol_growth));
    auto [kp, akp] = monitor_curvature_ratios(traj, settings.c);
    suite.series.push_back(std::move(kp));
    suite.series.push_back(std::move(akp));
    auto pinned = monitor_pinned_quantity(traj, settings.c, settings.lambda, settings.mu,
                                          settings.pinned_cap);
    suite.series.push_back(std::move(pinned.g_series));
    suite.series.push_back(std::move(pinned.h_floor));
    if (window) {
        auto qh = monitor_q_over_H(traj, *window, settings.c0);
        suite.series.push_back(std::move(qh.series));
    }
    suite.residuals = residual_evolution_identities(traj, settings.extended_identities);
    return suite;
}

}  // namespace neckflow
