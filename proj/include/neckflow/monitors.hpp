#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "neckflow/evolution.hpp"
#include "neckflow/singularity.hpp"

namespace neckflow {

/// Index sets of one snapshot: omega = { j : H_j < -c }, gamma = nodes
/// outside omega adjacent to a sign change of H + c.
struct RegionSlice {
    std::vector<Index> omega;
    std::vector<Index> gamma;
};

RegionSlice region_negative_H(const GeometrySample& sample, Scalar c);

struct RegionEvent {
    Scalar t = 0;
    Index node = 0;
    bool entered = true;
};

/// Per-snapshot region membership plus entry/exit bookkeeping. Membership is
/// recomputed per snapshot and never carried across a regrid; events are only
/// generated between same-grid snapshot pairs. Members of the first snapshot
/// count as entries (the initial slice of the parabolic boundary).
struct RegionTrack {
    Scalar c = 0;
    std::vector<RegionSlice> slices;
    std::vector<RegionEvent> events;
};

RegionTrack track_regions(const Trajectory& traj, Scalar c);

struct MonitorViolation {
    Scalar t = 0;
    Index node = -1;
    Scalar value = 0;
    Scalar bound = 0;
};

/// One audited scalar per snapshot against a declared bound. The bound
/// column already includes the monitor's tolerance; NaN values mark
/// snapshots where the monitored quantity is absent (e.g. empty region).
struct MonitorSeries {
    enum class BoundKind { upper, lower };
    std::string name;
    BoundKind kind = BoundKind::upper;
    std::string bound_provenance;
    std::vector<Scalar> t;
    std::vector<Scalar> value;
    std::vector<Scalar> bound;
    std::vector<MonitorViolation> violations;
    bool pass() const { return violations.empty(); }
};

/// Height bound in the negative-mean-curvature region: the series is
/// inf { y_j : j in Omega^-(t) } against the running infimum over boundary
/// entries; additionally flags any node that stays inside Omega^- across a
/// same-grid snapshot pair while its height drops by more than 10 h^2 + dt.
MonitorSeries monitor_height_bound(const Trajectory& traj, Scalar c);

/// max_j y_j v_j against (1 + tol_growth) times its initial maximum.
MonitorSeries monitor_yv(const Trajectory& traj, Scalar tol_growth = 1e-2);

/// (first)  max_j k_j / p_j over all nodes;
/// (second) max_j |k_j| / p_j over nodes with H_j >= 0 or |H_j| <= c,
/// with bounds composed from the initial data (see bound_provenance).
std::pair<MonitorSeries, MonitorSeries> monitor_curvature_ratios(const Trajectory& traj, Scalar c);

Scalar pinned_phi(Scalar v2, Scalar lambda, Scalar mu);

struct PinnedQuantityResult {
    MonitorSeries g_series;   ///< max over Omega^-(c) of |A|^2 phi(v^2)
    MonitorSeries h_floor;    ///< min_j H_j against -sqrt(2 * A2 cap)
    bool lambda_valid = true; ///< lambda > mu * max v^2 held over the region
    bool pole_flagged = false;
    Scalar max_v2_region = 1;
};

/// mu > 3/4 is required; lambda is validated post hoc against the largest
/// v^2 seen on the region and flagged when the pole is crossed. cap <= 0
/// selects 10x the initial all-node maximum of the pinned quantity.
PinnedQuantityResult monitor_pinned_quantity(const Trajectory& traj, Scalar c, Scalar lambda,
                                             Scalar mu, Scalar cap = -1);

struct QOverHResult {
    MonitorSeries series;          ///< interior max of |q|/H vs parabolic-boundary running max
    long excluded_nodes = 0;       ///< window nodes dropped for H <= 0
    long hypothesis_violations = 0;///< window nodes with H > 0 but |A|^2/H^2 > c0
    bool applicable = false;
    Scalar chain_q_max = 0;        ///< final-snapshot check |q| <= const * p
    Scalar chain_bound = 0;
    bool chain_ok = true;
};

QOverHResult monitor_q_over_H(const Trajectory& traj, const BlowupWindow& window, Scalar c0);

/// Discrete residuals of the evolution identities.
///   spatial:  max_j |Delta y - 1/y + H/v| per snapshot (no time differencing)
///   mean curvature: max_j |d_t H + (H rho'/v) dx H - Delta H - |A|^2 H| per
///     same-grid snapshot triple, centered time differences.
/// The *_interior columns exclude two nodes at each end, where the mirror
/// closure dominates for boundary-incompatible data. Extended items cover the
/// v, k, p and q identities on interior nodes.
struct ResidualRecord {
    std::vector<Scalar> t_spatial, spatial_max, spatial_interior;
    std::vector<Scalar> t_mc, mc_max, mc_interior;
    std::vector<Scalar> t_ext;
    std::vector<std::array<Scalar, 4>> ext_interior;  ///< v, k, p, q
};

ResidualRecord residual_evolution_identities(const Trajectory& traj, bool extended = false);

/// Everything cmd_run audits, bundled for reporting.
struct MonitorSettings {
    Scalar c = 0.25;
    Scalar mu = 1.0;
    Scalar lambda = -1;      ///< <= 0: 4 mu max(v0^2)
    Scalar pinned_cap = -1;  ///< <= 0: 10x initial max of the pinned quantity
    Scalar c0 = 100;
    Scalar tol_growth = 1e-2;
    bool extended_identities = false;
};

struct MonitorSuite {
    std::vector<MonitorSeries> series;
    ResidualRecord residuals;
    bool all_pass() const;
};

/// Runs every monitor over the trajectory; the q/H window requires a blow-up
/// window (from the singularity report) and is skipped when absent.
MonitorSuite run_monitors(const Trajectory& traj, const MonitorSettings& settings,
                          const std::optional<BlowupWindow>& window);

}  // namespace neckflow
