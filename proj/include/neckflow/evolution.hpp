#pragma once

#include <string>
#include <variant>
#include <vector>

#include "neckflow/geometry.hpp"

namespace neckflow {

enum class Scheme { explicit_rk2, semi_implicit };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct StepControls {
    Scheme scheme = Scheme::semi_implicit;
    Scalar safety = 0.9;          ///< in (0, 1]
    Scalar rho_stop = -1;         ///< pinch threshold; <= 0 means 1e-3 * initial min rho
    Scalar t_max = 1.0;
    int regrid_factor = 2;        ///< spacing divides by this on refinement
    Scalar regrid_trigger = 20;   ///< refine when 1/max|A| spans fewer nodes than this
    int snapshot_stride = 100;    ///< accepted steps between recorded snapshots
    Index max_nodes = 400001;     ///< refinement ceiling
    Scalar wall_clock_budget = 0; ///< seconds; 0 disables the budget

    void validate() const;
    /// Copy with rho_stop resolved against the given initial state.
    StepControls resolved(const FlowState& initial) const;
};

/// A step that would cross the pinch threshold is rejected and reported
/// as this signal instead of a state.
struct PinchSignal {
    Scalar t = 0;        ///< time the rejected step would have reached
    Index node = 0;      ///< node attaining the minimum
    Scalar rho_min = 0;  ///< offending value
};

using StepResult = std::variant<FlowState, PinchSignal>;

/// Graph-form flow speed: d rho / dt = -H v = rho''/(1+rho'^2) - 1/rho.
Array rhs(const FlowState& state);

/// safety * min( min_j h^2 v_j^2 / 2 , min_j rho_j^2 / 4 ).
/// The first term is the explicit diffusion limit of the quasilinear term,
/// the second keeps one reaction step from overshooting the axis.
Scalar stable_dt(const FlowState& state, const StepControls& controls);

/// Advance one step of dt.
///   explicit_rk2:  midpoint rule on rhs.
///   semi_implicit: two-stage midpoint with the diffusion term taken
///     backward (rho'' coefficient frozen at 1/v^2 of the stage state,
///     tridiagonal solve with Neumann mirror closure) and the reaction
///     term -1/rho explicit at the stage states.
StepResult step(const FlowState& state, Scalar dt, const StepControls& controls);

struct TrajectoryEvent {
    enum class Kind { regrid, pinch_detected, time_cap, step_rejected };
    Kind kind;
    Scalar t = 0;
    std::string detail;
};

const char* event_kind_name(TrajectoryEvent::Kind k);
TrajectoryEvent::Kind event_kind_from_name(const std::string& name);

struct Snapshot {
    FlowState state;
    GeometrySample sample;
};

/// Time-ordered record of one run. Snapshot times are strictly increasing;
/// a pinch_detected event, if present, is the last event.
struct Trajectory {
    std::vector<Snapshot> snapshots;
    std::vector<TrajectoryEvent> events;
    StepControls controls;

    bool pinch_detected() const;
    /// True when no regrid event falls in the open interval (t0, t1).
    bool same_grid_between(Scalar t0, Scalar t1) const;
};

/// Repeatedly applies stable_dt + step, records snapshots every
/// snapshot_stride accepted steps, refines the grid when the curvature
/// scale 1/max|A| is resolved by fewer than regrid_trigger nodes, and
/// stops on pinch, t_max, or the wall-clock budget. The initial and the
/// final accepted state are always recorded.
Trajectory evolve(const FlowState& initial, const StepControls& controls);

}  // namespace neckflow
