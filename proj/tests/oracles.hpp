#pragma once

// Test-only oracles, independent of the library's solvers: closed-form
// solutions, synthetic trajectories assembled from exact values, and a
// seeded generator of admissible (smooth, positive, even-ended) profiles.

#include <cmath>
#include <random>

#include "neckflow/evolution.hpp"
#include "neckflow/preset.hpp"

namespace oracles {

using namespace neckflow;

/// Shrinking cylinder: rho(t) = sqrt(r0^2 - 2t), extinct at T = r0^2 / 2.
inline Scalar cylinder_radius(Scalar r0, Scalar t) { return std::sqrt(r0 * r0 - 2 * t); }

inline FlowState cylinder_state(Scalar r0, Scalar t, Scalar a, Scalar b, Index n) {
    FlowState s;
    s.grid = make_grid(a, b, n);
    s.t = t;
    s.rho = Array::Constant(n, cylinder_radius(r0, t));
    return s;
}

/// Exact-solution trajectory sampled at the given times (pinch event added
/// after the last sample so the analysis ops accept it).
inline Trajectory cylinder_trajectory(Scalar r0, const std::vector<Scalar>& times,
                                      Index n = 41) {
    Trajectory traj;
    for (Scalar t : times) {
        FlowState st = cylinder_state(r0, t, 0, 1, n);
        traj.snapshots.push_back(Snapshot{st, geometry_sample(st)});
    }
    traj.events.push_back({TrajectoryEvent::Kind::pinch_detected, times.back(), "synthetic"});
    return traj;
}

/// Flat-profile trajectory with rho(t) = T - t, so that max|A|^2 = (T-t)^-2:
/// a synthetic faster-than-type-I blow-up track.
inline Trajectory type_II_trajectory(Scalar T, const std::vector<Scalar>& times, Index n = 41) {
    Trajectory traj;
    for (Scalar t : times) {
        FlowState st;
        st.grid = make_grid(0, 1, n);
        st.t = t;
        st.rho = Array::Constant(n, T - t);
        traj.snapshots.push_back(Snapshot{st, geometry_sample(st)});
    }
    traj.events.push_back({TrajectoryEvent::Kind::pinch_detected, times.back(), "synthetic"});
    return traj;
}

/// Smooth admissible profile: rho = m + sum_k a_k cos(k pi (x-a)/(b-a)).
/// Even at both ends, positive by construction.
struct RandomProfile {
    Scalar m;
    std::vector<Scalar> amps;

    Scalar value(Scalar xhat) const {  // xhat in [0, 1]
        Scalar r = m;
        for (size_t k = 0; k < amps.size(); ++k) {
            r += amps[k] * std::cos(Scalar(k + 1) * M_PI * xhat);
        }
        return r;
    }
    Scalar d1(Scalar xhat, Scalar span) const {
        Scalar r = 0;
        for (size_t k = 0; k < amps.size(); ++k) {
            const Scalar w = Scalar(k + 1) * M_PI;
            r -= amps[k] * (w / span) * std::sin(w * xhat);
        }
        return r;
    }
    Scalar d2(Scalar xhat, Scalar span) const {
        Scalar r = 0;
        for (size_t k = 0; k < amps.size(); ++k) {
            const Scalar w = Scalar(k + 1) * M_PI;
            r -= amps[k] * (w * w / (span * span)) * std::cos(w * xhat);
        }
        return r;
    }
};

inline RandomProfile random_profile(std::mt19937_64& rng, int max_modes = 4) {
    std::uniform_real_distribution<Scalar> mean_dist(0.5, 2.0);
    std::uniform_int_distribution<int> modes_dist(1, max_modes);
    RandomProfile p;
    p.m = mean_dist(rng);
    const int modes = modes_dist(rng);
    Scalar budget = Scalar(0.6) * p.m;
    std::uniform_real_distribution<Scalar> frac(0.1, 0.9);
    std::uniform_real_distribution<Scalar> sign(-1, 1);
    for (int k = 0; k < modes; ++k) {
        const Scalar a = frac(rng) * budget / modes * (sign(rng) < 0 ? -1 : 1);
        p.amps.push_back(a);
    }
    return p;
}

inline FlowState profile_state(const RandomProfile& p, Scalar a, Scalar b, Index n) {
    FlowState s;
    s.grid = make_grid(a, b, n);
    s.t = 0;
    s.rho.resize(n);
    for (Index j = 0; j < n; ++j) {
        s.rho[j] = p.value((s.grid.nodes[j] - a) / (b - a));
    }
    return s;
}

/// Independent least-squares line fit (naive two-pass formulas).
struct LineFit {
    Scalar slope, intercept;
};
inline LineFit fit_line(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
    const size_t n = x.size();
    Scalar sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const Scalar mx = sx / n, my = sy / n;
    Scalar sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return {sxy / sxx, my - sxy / sxx * mx};
}

}  // namespace oracles
