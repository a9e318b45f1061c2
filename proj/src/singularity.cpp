#include "neckflow/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace neckflow {

namespace {

Scalar max_A2_of(const Snapshot& s) { return s.sample.A2.maxCoeff(); }

}  // namespace

std::optional<ExtinctionFit> estimate_extinction(const Trajectory& traj, Scalar window_fraction) {
    if (!traj.pinch_detected()) return std::nullopt;
    const Index total = static_cast<Index>(traj.snapshots.size());
    if (total < 2) return std::nullopt;

    Index count = std::max<Index>(3, static_cast<Index>(std::ceil(window_fraction * total)));
    count = std::min(count, total);
    const Index first = total - count;

    std::vector<Scalar> ts, us;
    ts.reserve(count);
    us.reserve(count);
    for (Index i = first; i < total; ++i) {
        ts.push_back(traj.snapshots[i].state.t);
        us.push_back(Scalar(1) / max_A2_of(traj.snapshots[i]));
    }
    const Index m = static_cast<Index>(ts.size());
    if (m < 2) return std::nullopt;

    // Ordinary least squares u = intercept + slope * t.
    Scalar st = 0, su = 0;
    for (Index i = 0; i < m; ++i) { st += ts[i]; su += us[i]; }
    const Scalar tbar = st / m, ubar = su / m;
    Scalar sxx = 0, sxy = 0, syy = 0;
    for (Index i = 0; i < m; ++i) {
        const Scalar dt = ts[i] - tbar, du = us[i] - ubar;
        sxx += dt * dt;
        sxy += dt * du;
        syy += du * du;
    }
    if (sxx <= 0) return std::nullopt;

    ExtinctionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ubar - fit.slope * tbar;
    fit.points_used = static_cast<int>(m);
    fit.window_t0 = ts.front();
    fit.window_t1 = ts.back();
    if (fit.slope >= 0) {
        // Curvature is not blowing up along the fit window; report the last
        // time with an unusable uncertainty rather than extrapolate backwards.
        fit.T_est = ts.back();
        fit.uncertainty = std::numeric_limits<Scalar>::infinity();
        fit.r2 = 0;
        return fit;
    }
    fit.T_est = -fit.intercept / fit.slope;

    Scalar ss_res = 0;
    for (Index i = 0; i < m; ++i) {
        const Scalar r = us[i] - (fit.intercept + fit.slope * ts[i]);
        ss_res += r * r;
    }
    fit.r2 = (syy > 0) ? Scalar(1) - ss_res / syy : Scalar(1);

    if (m > 2) {
        const Scalar sigma2 = ss_res / static_cast<Scalar>(m - 2);
        const Scalar var_slope = sigma2 / sxx;
        const Scalar var_intercept = sigma2 * (Scalar(1) / m + tbar * tbar / sxx);
        const Scalar cov = -sigma2 * tbar / sxx;
        // Delta method on T = -intercept/slope.
        const Scalar dTdi = -Scalar(1) / fit.slope;
        const Scalar dTds = fit.intercept / (fit.slope * fit.slope);
        const Scalar var_T = dTdi * dTdi * var_intercept + dTds * dTds * var_slope +
                             2 * dTdi * dTds * cov;
        fit.uncertainty = std::sqrt(std::max(var_T, Scalar(0)));
    } else {
        fit.uncertainty = std::numeric_limits<Scalar>::infinity();
    }
    return fit;
}

std::vector<RescalingPoint> rescaling_sequence(const Trajectory& traj, Scalar T_est, int i_max) {
    std::vector<RescalingPoint> points;
    if (!traj.pinch_detected() || traj.snapshots.size() < 3 || !(T_est > 0)) return points;

    // Base scale: i = 0 lands one third of the run before T_est.
    const Scalar s = Scalar(3) / T_est;

    // Running maximum of |A| over snapshots, with the attaining node.
    const Index total = static_cast<Index>(traj.snapshots.size());
    std::vector<Scalar> run_alpha(total), run_x(total);
    Scalar best = 0, best_x = traj.snapshots[0].state.grid.nodes[0];
    for (Index i = 0; i < total; ++i) {
        Index j;
        const Scalar a = std::sqrt(traj.snapshots[i].sample.A2.maxCoeff(&j));
        if (a > best) {
            best = a;
            best_x = traj.snapshots[i].state.grid.nodes[j];
        }
        run_alpha[i] = best;
        run_x[i] = best_x;
    }

    Index prev_snapshot = -1;
    for (int i = 0; i <= i_max; ++i) {
        const Scalar target = T_est - Scalar(1) / (s * std::pow(Scalar(2), i));
        // Latest snapshot at or before the target time.
        Index idx = -1;
        for (Index k = 0; k < total; ++k) {
            if (traj.snapshots[k].state.t <= target) idx = k;
        }
        if (idx < 0 || idx == prev_snapshot) continue;
        prev_snapshot = idx;
        RescalingPoint p;
        p.i = static_cast<int>(points.size());
        p.t = traj.snapshots[idx].state.t;
        p.x = run_x[idx];
        p.alpha = run_alpha[idx];
        p.snapshot = idx;
        points.push_back(p);
    }
    if (points.size() < 3) points.clear();
    return points;
}

FlowState rescale_profile(const FlowState& state, Scalar center, Scalar alpha, Scalar window) {
    validate_state(state);
    if (!(alpha > 0)) throw InputError("rescale_profile: alpha must be positive");
    if (center < state.grid.a || center > state.grid.b) {
        throw InputError("rescale_profile: center lies outside the grid interval");
    }

    const Index n = state.grid.n;
    const Scalar h = state.grid.h;
    const Array& x = state.grid.nodes;

    FlowState out;
    out.t = 0;
    out.grid.h = alpha * h;

    const Scalar ic_real = (center - state.grid.a) / h;
    const Index ic = static_cast<Index>(std::llround(ic_real));
    const bool aligned = ic >= 0 && ic < n && std::abs(center - x[ic]) <= h * 1e-9;

    if (aligned) {
        // Index arithmetic keeps node coincidence exact. A blow-up centred at
        // (or next to) a domain end is a boundary neck: the Neumann mirror
        // makes the surface even across that plane, so the window may reflect
        // once past the end instead of clipping.
        Index m = static_cast<Index>(std::floor(window / (alpha * h) * (1 + 1e-12)));
        m = std::min<Index>(m, 2 * (n - 1));
        const bool reflect_left = ic <= 2;
        const bool reflect_right = ic >= n - 3;
        const Index k_lo = std::max(-m, (reflect_left ? -(n - 1) : Index(0)) - ic);
        const Index k_hi = std::min(m, (reflect_right ? 2 * (n - 1) : n - 1) - ic);
        const Index cnt = k_hi - k_lo + 1;
        if (cnt < 5) throw InputError("rescale_profile: window holds fewer than 5 nodes");

        out.grid.n = cnt;
        out.grid.nodes.resize(cnt);
        out.rho.resize(cnt);
        for (Index k = k_lo; k <= k_hi; ++k) {
            Index j = ic + k;
            if (j < 0) j = -j;
            if (j > n - 1) j = 2 * (n - 1) - j;
            out.grid.nodes[k - k_lo] = out.grid.h * static_cast<Scalar>(k);
            out.rho[k - k_lo] = alpha * state.rho[j];
        }
    } else {
        Index lo = -1, hi = -1;
        for (Index j = 0; j < n; ++j) {
            if (std::abs(alpha * (x[j] - center)) <= window) {
                if (lo < 0) lo = j;
                hi = j;
            }
        }
        if (lo < 0 || hi - lo + 1 < 5) {
            throw InputError("rescale_profile: window holds fewer than 5 nodes");
        }
        out.grid.n = hi - lo + 1;
        out.grid.nodes = alpha * (x.segment(lo, out.grid.n) - center);
        out.rho = alpha * state.rho.segment(lo, out.grid.n);
    }

    out.grid.a = out.grid.nodes[0];
    out.grid.b = out.grid.nodes[out.grid.n - 1];
    return out;
}

CylinderDeviation compare_to_cylinder(const FlowState& rescaled, Scalar window) {
    validate_state(rescaled);
    CylinderDeviation dev;
    const Scalar avail = std::min(-rescaled.grid.a, rescaled.grid.b);
    dev.window_used = window;
    if (window > avail + rescaled.grid.h / 2) {
        dev.window_used = avail;
        dev.clipped = true;
    }
    Scalar sup = 0;
    bool any = false;
    for (Index j = 0; j < rescaled.grid.n; ++j) {
        if (std::abs(rescaled.grid.nodes[j]) <= dev.window_used + rescaled.grid.h / 2) {
            sup = std::max(sup, std::abs(rescaled.rho[j] - Scalar(1)));
            any = true;
        }
    }
    if (!any) throw InputError("compare_to_cylinder: no nodes inside the window");
    dev.sup_abs = sup;
    dev.sup_rel = sup;  // reference radius is 1 in rescaled units
    return dev;
}

namespace {

Scalar catenoid_rms(const FlowState& s, Scalar c) {
    const Array model = c * (s.grid.nodes / c).cosh();
    return std::sqrt((model - s.rho).square().mean());
}

// d/dc of the squared misfit, up to a factor 2.
Scalar catenoid_normal_eq(const FlowState& s, Scalar c) {
    const Array arg = s.grid.nodes / c;
    const Array model = c * arg.cosh();
    const Array dmodel = arg.cosh() - arg * arg.sinh();
    return ((model - s.rho) * dmodel).sum();
}

}  // namespace

CatenoidFit compare_to_catenoid(const FlowState& rescaled) {
    validate_state(rescaled);
    constexpr Scalar c_lo = 1e-3, c_hi = 1e3;
    constexpr int scan_points = 241;

    CatenoidFit fit;
    Scalar best_rms = std::numeric_limits<Scalar>::infinity();
    Scalar best_c = c_lo;
    Scalar prev_c = 0, prev_g = 0;
    Scalar bracket_a = 0, bracket_b = 0;
    bool have_bracket = false;

    for (int i = 0; i < scan_points; ++i) {
        const Scalar c = c_lo * std::pow(c_hi / c_lo, Scalar(i) / (scan_points - 1));
        const Scalar r = catenoid_rms(rescaled, c);
        if (std::isfinite(r) && r < best_rms) {
            best_rms = r;
            best_c = c;
        }
        const Scalar g = catenoid_normal_eq(rescaled, c);
        if (i > 0 && std::isfinite(g) && std::isfinite(prev_g) && prev_g * g < 0) {
            // Keep the sign change nearest the running best misfit.
            if (!have_bracket || std::abs(std::log(prev_c / best_c)) <
                                     std::abs(std::log(bracket_a / best_c))) {
                bracket_a = prev_c;
                bracket_b = c;
                have_bracket = true;
            }
        }
        prev_c = c;
        prev_g = g;
    }

    if (have_bracket) {
        Scalar a = bracket_a, b = bracket_b;
        Scalar ga = catenoid_normal_eq(rescaled, a);
        for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
            const Scalar mid = std::sqrt(a * b);
            const Scalar gm = catenoid_normal_eq(rescaled, mid);
            if (ga * gm <= 0) {
                b = mid;
            } else {
                a = mid;
                ga = gm;
            }
        }
        const Scalar c_root = std::sqrt(a * b);
        const Scalar r_root = catenoid_rms(rescaled, c_root);
        if (r_root <= best_rms * (1 + 1e-9)) {
            best_c = c_root;
            best_rms = r_root;
        }
        fit.converged = true;
    } else {
        fit.converged = false;
    }

    fit.c = best_c;
    fit.rms_residual = best_rms;
    const Scalar xm = std::max(std::abs(rescaled.grid.a), std::abs(rescaled.grid.b));
    fit.yv_growth = (best_c / 2) * (std::cosh(2 * xm / best_c) + 1);
    return fit;
}

const char* verdict_name(TypeVerdict v) {
    switch (v) {
        case TypeVerdict::type_I: return "type_I";
        case TypeVerdict::type_II: return "type_II";
        case TypeVerdict::no_singularity: return "no_singularity";
    }
    return "?";
}

SingularityReport classify(const Trajectory& traj, const std::optional<ExtinctionFit>& fit,
                           const AnalysisSettings& settings) {
    SingularityReport rep;
    rep.fit = fit;
    if (!traj.pinch_detected() || !fit) {
        rep.verdict = TypeVerdict::no_singularity;
        return rep;
    }
    const Scalar T = fit->T_est;

    // Blow-up location: node of the latest running-max of |A|.
    {
        Scalar best = -1;
        for (const auto& snap : traj.snapshots) {
            Index j;
            const Scalar a = snap.sample.A2.maxCoeff(&j);
            if (a > best) {
                best = a;
                rep.x_star = snap.state.grid.nodes[j];
            }
        }
    }

    // Rate series (T_est - t) max|A|^2 over sampled times before T_est.
    Scalar min_gap = std::numeric_limits<Scalar>::infinity();
    for (const auto& snap : traj.snapshots) {
        const Scalar gap = T - snap.state.t;
        if (gap > 0) min_gap = std::min(min_gap, gap);
    }
    Scalar rate_constant = 0, rate_tail = 0;
    bool tail_seen = false;
    for (const auto& snap : traj.snapshots) {
        const Scalar gap = T - snap.state.t;
        if (gap <= 0) continue;
        const Scalar rate = gap * snap.sample.A2.maxCoeff();
        rate_constant = std::max(rate_constant, rate);
        if (gap <= 10 * min_gap) {
            rate_tail = std::max(rate_tail, rate);
            tail_seen = true;
        }
    }
    rep.rate_constant = rate_constant;
    rep.rate_tail = tail_seen ? rate_tail : Scalar(0);

    // Discrete N_eps and the Prop-style hypothesis diagnostics.
    const Scalar span = traj.snapshots.front().state.grid.b - traj.snapshots.front().state.grid.a;
    const Scalar eps_x = settings.eps_x > 0 ? settings.eps_x : Scalar(0.1) * span;
    rep.window.x_lo = rep.x_star - eps_x;
    rep.window.x_hi = rep.x_star + eps_x;
    rep.window.t_lo = std::max(Scalar(0), T * (1 - settings.eps_t_fraction));
    rep.window.t_hi = T;
    Scalar ratio = 0, maxH = 0;
    for (const auto& snap : traj.snapshots) {
        if (snap.state.t < rep.window.t_lo || snap.state.t > rep.window.t_hi) continue;
        const auto& g = snap.sample;
        for (Index j = 0; j < g.H.size(); ++j) {
            const Scalar x = snap.state.grid.nodes[j];
            if (x < rep.window.x_lo || x > rep.window.x_hi) continue;
            maxH = std::max(maxH, std::abs(g.H[j]));
            if (g.H[j] > 0) ratio = std::max(ratio, g.A2[j] / (g.H[j] * g.H[j]));
        }
    }
    rep.ratio_bound = ratio;
    rep.max_H_window = maxH;

    rep.rescaling = rescaling_sequence(traj, T, settings.i_max);
    rep.rescaling_sufficient = !rep.rescaling.empty();
    for (const auto& p : rep.rescaling) {
        try {
            FlowState rs = rescale_profile(traj.snapshots[p.snapshot].state, p.x, p.alpha,
                                           settings.rescale_window);
            RescaleComparison cmp;
            cmp.i = p.i;
            cmp.cylinder = compare_to_cylinder(rs, settings.compare_window);
            rep.comparisons.push_back(cmp);
            if (&p == &rep.rescaling.back()) rep.catenoid = compare_to_catenoid(rs);
        } catch (const InputError&) {
            // Window under-resolved at this point; skip it.
        }
    }

    const bool tail_ok = tail_seen && rep.rate_tail >= settings.rate_tail_lo &&
                         rep.rate_tail <= settings.rate_tail_hi;
    rep.verdict = (rate_constant <= settings.rate_cap && tail_ok) ? TypeVerdict::type_I
                                                                  : TypeVerdict::type_II;
    return rep;
}

}  // namespace neckflow
