#pragma once

#include <optional>
#include <vector>

#include "neckflow/evolution.hpp"

namespace neckflow {

/// Least-squares line through u(t) = 1/max|A|^2 over the tail of the run.
/// For a shrinking cylinder u = 2(T - t) exactly, so slope = -2 and the
/// root of the line is the extinction time.
struct ExtinctionFit {
    Scalar T_est = 0;
    Scalar uncertainty = 0;  ///< standard error of the root from fit residuals
    Scalar slope = 0;
    Scalar intercept = 0;
    Scalar r2 = 1;           ///< linearity diagnostic; < 0.99 flags a poor fit
    int points_used = 0;
    Scalar window_t0 = 0;
    Scalar window_t1 = 0;
    bool poor_linearity() const { return r2 < Scalar(0.99); }
};

/// nullopt when the trajectory did not end in a pinch.
std::optional<ExtinctionFit> estimate_extinction(const Trajectory& traj,
                                                 Scalar window_fraction = 0.3);

/// One point of the blow-up selection sequence: alpha is the running
/// maximum of |A| over all snapshots up to t, x the node attaining it.
struct RescalingPoint {
    int i = 0;
    Scalar t = 0;
    Scalar x = 0;
    Scalar alpha = 0;
    Index snapshot = 0;
};

/// Dyadic selection t_i = latest snapshot time <= T_est - 1/(s 2^i), with the
/// base scale s placing i = 0 in the last third of the run. Fewer than three
/// usable points is reported by an empty return (insufficient resolution).
std::vector<RescalingPoint> rescaling_sequence(const Trajectory& traj, Scalar T_est, int i_max);

/// Parabolic zoom of a profile: x~ = alpha (x - center), rho~ = alpha rho,
/// restricted to |x~| <= window and relabelled to tau = 0. Curvatures of the
/// result scale as |A~| = |A| / alpha.
FlowState rescale_profile(const FlowState& state, Scalar center, Scalar alpha,
                          Scalar window = 4.0);

struct CylinderDeviation {
    Scalar sup_abs = 0;   ///< sup over |x~| <= window of |rho~ - 1|
    Scalar sup_rel = 0;
    Scalar window_used = 0;
    bool clipped = false; ///< window exceeded the available data
};

CylinderDeviation compare_to_cylinder(const FlowState& rescaled, Scalar window);

struct CatenoidFit {
    Scalar c = 0;            ///< best scale in c cosh(x~/c)
    Scalar rms_residual = 0;
    Scalar yv_growth = 0;    ///< max over the window of (c/2)(cosh(2 x~/c) + 1)
    bool converged = true;   ///< bisection of the normal equation found a root
};

/// One-parameter least-squares fit of c cosh(x~/c), c in [1e-3, 1e3].
CatenoidFit compare_to_catenoid(const FlowState& rescaled);

enum class TypeVerdict { type_I, type_II, no_singularity };
const char* verdict_name(TypeVerdict v);

struct AnalysisSettings {
    Scalar fit_window_fraction = 0.3;
    Scalar rate_cap = 50;       ///< type I requires rate_constant <= rate_cap
    Scalar rate_tail_lo = 0.1;  ///< and rate_tail within [lo, hi]
    Scalar rate_tail_hi = 10;
    int i_max = 8;
    Scalar rescale_window = 4;
    Scalar compare_window = 2;
    Scalar eps_x = -1;          ///< axis half-width of the blow-up window; <=0: 0.1 (b-a)
    Scalar eps_t_fraction = 0.2;///< time depth of the window as a fraction of T_est
};

/// Space-time window around the blow-up point (the discrete N_eps).
struct BlowupWindow {
    Scalar x_lo = 0, x_hi = 0;
    Scalar t_lo = 0, t_hi = 0;
};

struct RescaleComparison {
    int i = 0;
    CylinderDeviation cylinder;
};

struct SingularityReport {
    TypeVerdict verdict = TypeVerdict::no_singularity;
    std::optional<ExtinctionFit> fit;
    Scalar x_star = 0;
    Scalar rate_constant = 0;  ///< sup over sampled t of (T_est - t) max|A|^2
    Scalar rate_tail = 0;      ///< same sup over the last decade of T_est - t
    Scalar ratio_bound = 0;    ///< max over the window of |A|^2/H^2 where H > 0
    Scalar max_H_window = 0;   ///< bounded-H diagnostic
    BlowupWindow window;
    std::vector<RescalingPoint> rescaling;
    std::vector<RescaleComparison> comparisons;
    std::optional<CatenoidFit> catenoid;  ///< fit at the final rescaling point
    bool rescaling_sufficient = false;
};

SingularityReport classify(const Trajectory& traj, const std::optional<ExtinctionFit>& fit,
                           const AnalysisSettings& settings = {});

}  // namespace neckflow
