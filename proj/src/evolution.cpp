#include "neckflow/evolution.hpp"

#include <cassert>
#include <chrono>
#include <cmath>

namespace neckflow {

const char* scheme_name(Scheme s) {
    return s == Scheme::explicit_rk2 ? "explicit_rk2" : "semi_implicit";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "explicit_rk2") return Scheme::explicit_rk2;
    if (name == "semi_implicit") return Scheme::semi_implicit;
    throw ConfigError("unknown scheme '" + name + "'");
}

void StepControls::validate() const {
    if (!(safety > 0 && safety <= 1)) throw ConfigError("controls: safety must lie in (0, 1]");
    if (t_max <= 0) throw ConfigError("controls: t_max must be positive");
    if (regrid_factor < 2) throw ConfigError("controls: regrid_factor must be at least 2");
    if (regrid_trigger <= 0) throw ConfigError("controls: regrid_trigger must be positive");
    if (snapshot_stride < 1) throw ConfigError("controls: snapshot_stride must be at least 1");
    if (max_nodes < 5) throw ConfigError("controls: max_nodes must be at least 5");
    if (wall_clock_budget < 0) throw ConfigError("controls: wall_clock_budget must be >= 0");
}

StepControls StepControls::resolved(const FlowState& initial) const {
    StepControls out = *this;
    if (out.rho_stop <= 0) out.rho_stop = Scalar(1e-3) * initial.rho.minCoeff();
    return out;
}

Array rhs(const FlowState& state) {
    auto [dr, ddr] = derivatives(state);
    return ddr / (Scalar(1) + dr.square()) - state.rho.inverse();
}

Scalar stable_dt(const FlowState& state, const StepControls& controls) {
    auto [dr, ddr] = derivatives(state);
    const Scalar h = state.grid.h;
    const Scalar diffusion = Scalar(0.5) * h * h * (Scalar(1) + dr.square()).minCoeff();
    const Scalar reaction = Scalar(0.25) * state.rho.square().minCoeff();
    return controls.safety * std::min(diffusion, reaction);
}

namespace {

// Solves (I - dt * L) x = b where L = diag(1/v^2) d^2/dx^2 with the mirror
// closure (doubled off-diagonal in the boundary rows). The system is strictly
// diagonally dominant for any dt > 0; the Thomas sweep cannot break down.
Array solve_backward_diffusion(const Array& b, const Array& v, Scalar dt, Scalar h) {
    const Index n = b.size();
    const Array lam = dt / (h * h * v.square());

    Array diag = Scalar(1) + 2 * lam;
    Array upper = -lam;
    Array lower = -lam;
    upper[0] *= 2;
    lower[n - 1] *= 2;

    // Dominance margin is exactly 1 in every row (row 0 and n-1 carry a
    // single doubled off-diagonal); the sweep cannot break down.
    assert((diag.segment(1, n - 2) - upper.segment(1, n - 2).abs() -
            lower.segment(1, n - 2).abs() >= Scalar(0.5)).all());
    assert(diag[0] - std::abs(upper[0]) >= Scalar(0.5));
    assert(diag[n - 1] - std::abs(lower[n - 1]) >= Scalar(0.5));

    Array cp(n), x(n);
    cp[0] = upper[0] / diag[0];
    x[0] = b[0] / diag[0];
    for (Index i = 1; i < n; ++i) {
        const Scalar m = diag[i] - lower[i] * cp[i - 1];
        cp[i] = upper[i] / m;
        x[i] = (b[i] - lower[i] * x[i - 1]) / m;
    }
    for (Index i = n - 2; i >= 0; --i) x[i] -= cp[i] * x[i + 1];
    return x;
}

StepResult finish_step(const FlowState& base, Array rho_new, Scalar t_new, Scalar rho_stop) {
    Index jmin;
    const Scalar mn = rho_new.minCoeff(&jmin);
    if (mn <= rho_stop) return PinchSignal{t_new, jmin, mn};
    FlowState out;
    out.grid = base.grid;
    out.t = t_new;
    out.rho = std::move(rho_new);
    return out;
}

}  // namespace

StepResult step(const FlowState& state, Scalar dt, const StepControls& controls) {
    validate_state(state);
    if (!(dt > 0)) throw InputError("step: dt must be positive");
    const Scalar stop = std::max(controls.rho_stop, Scalar(0));
    const Scalar t_new = state.t + dt;

    if (controls.scheme == Scheme::explicit_rk2) {
        const Array k1 = rhs(state);
        FlowState mid;
        mid.grid = state.grid;
        mid.t = state.t + dt / 2;
        mid.rho = state.rho + (dt / 2) * k1;
        Index jmin;
        const Scalar mid_min = mid.rho.minCoeff(&jmin);
        if (mid_min <= stop) return PinchSignal{mid.t, jmin, mid_min};
        const Array k2 = rhs(mid);
        return finish_step(state, state.rho + dt * k2, t_new, stop);
    }

    // Semi-implicit midpoint. Half step to t + dt/2 with the current-state
    // coefficient, then a full backward step with the coefficient and the
    // reaction both taken at the midpoint stage.
    const Scalar h = state.grid.h;
    auto [dr0, ddr0] = derivatives(state);
    const Array v0 = gradient_function(dr0);

    Array half_rhs = state.rho - (dt / 2) * state.rho.inverse();
    Array rho_half = solve_backward_diffusion(half_rhs, v0, dt / 2, h);
    Index jmin;
    Scalar half_min = rho_half.minCoeff(&jmin);
    if (half_min <= stop) return PinchSignal{state.t + dt / 2, jmin, half_min};

    FlowState mid;
    mid.grid = state.grid;
    mid.t = state.t + dt / 2;
    mid.rho = std::move(rho_half);
    auto [dr1, ddr1] = derivatives(mid);
    const Array v1 = gradient_function(dr1);

    Array full_rhs = state.rho - dt * mid.rho.inverse();
    Array rho_new = solve_backward_diffusion(full_rhs, v1, dt, h);
    return finish_step(state, std::move(rho_new), t_new, stop);
}

const char* event_kind_name(TrajectoryEvent::Kind k) {
    switch (k) {
        case TrajectoryEvent::Kind::regrid: return "regrid";
        case TrajectoryEvent::Kind::pinch_detected: return "pinch_detected";
        case TrajectoryEvent::Kind::time_cap: return "time_cap";
        case TrajectoryEvent::Kind::step_rejected: return "step_rejected";
    }
    return "?";
}

TrajectoryEvent::Kind event_kind_from_name(const std::string& name) {
    if (name == "regrid") return TrajectoryEvent::Kind::regrid;
    if (name == "pinch_detected") return TrajectoryEvent::Kind::pinch_detected;
    if (name == "time_cap") return TrajectoryEvent::Kind::time_cap;
    if (name == "step_rejected") return TrajectoryEvent::Kind::step_rejected;
    throw ConfigError("unknown event kind '" + name + "'");
}

bool Trajectory::pinch_detected() const {
    for (const auto& e : events) {
        if (e.kind == TrajectoryEvent::Kind::pinch_detected) return true;
    }
    return false;
}

bool Trajectory::same_grid_between(Scalar t0, Scalar t1) const {
    for (const auto& e : events) {
        if (e.kind == TrajectoryEvent::Kind::regrid && e.t > t0 && e.t <= t1) return false;
    }
    return true;
}

Trajectory evolve(const FlowState& initial, const StepControls& controls_in) {
    controls_in.validate();
    validate_state(initial);
    const StepControls controls = controls_in.resolved(initial);
    if (initial.rho.minCoeff() <= controls.rho_stop) {
        throw ConfigError("evolve: initial profile is already at the pinch threshold");
    }

    Trajectory traj;
    traj.controls = controls;

    FlowState state = initial;
    auto record = [&](const FlowState& s) {
        traj.snapshots.push_back(Snapshot{s, geometry_sample(s)});
    };
    record(state);

    const auto wall_start = std::chrono::steady_clock::now();
    auto wall_exceeded = [&]() {
        if (controls.wall_clock_budget <= 0) return false;
        const std::chrono::duration<double> used = std::chrono::steady_clock::now() - wall_start;
        return used.count() > controls.wall_clock_budget;
    };

    long accepted = 0;
    bool final_recorded = true;  // initial snapshot covers t = 0
    int rejects_in_a_row = 0;

    while (true) {
        if (state.t >= controls.t_max * (1 - 1e-15)) {
            traj.events.push_back({TrajectoryEvent::Kind::time_cap, state.t, "t_max"});
            break;
        }
        if (wall_exceeded()) {
            traj.events.push_back({TrajectoryEvent::Kind::time_cap, state.t, "wall_clock"});
            break;
        }

        GeometrySample g = geometry_sample(state);
        const Scalar max_abs_A = std::sqrt(g.A2.maxCoeff());

        // Refine while the curvature length scale spans too few nodes.
        if (max_abs_A * controls.regrid_trigger * state.grid.h > Scalar(1)) {
            const Index n_new = static_cast<Index>(controls.regrid_factor) * (state.grid.n - 1) + 1;
            if (n_new <= controls.max_nodes) {
                state = resample(state, n_new);
                traj.events.push_back({TrajectoryEvent::Kind::regrid, state.t,
                                       "n=" + std::to_string(n_new)});
                continue;
            }
        }

        Scalar dt = stable_dt(state, controls);
        dt = std::min(dt, controls.t_max - state.t);
        for (int r = 0; r < rejects_in_a_row; ++r) dt /= 2;
        if (!(dt > state.t * 1e-16 + 1e-300)) {
            throw NumericsError("evolve: time step collapsed at t=" + std::to_string(state.t));
        }

        StepResult res = step(state, dt, controls);
        if (std::holds_alternative<PinchSignal>(res)) {
            const auto& sig = std::get<PinchSignal>(res);
            // Genuine pinch only near the threshold; otherwise retry smaller.
            if (state.rho.minCoeff() <= 2 * controls.rho_stop || rejects_in_a_row >= 40) {
                if (!final_recorded) record(state);
                traj.events.push_back({TrajectoryEvent::Kind::pinch_detected, sig.t,
                                       "node=" + std::to_string(sig.node) +
                                       " rho=" + std::to_string(sig.rho_min)});
                return traj;
            }
            traj.events.push_back({TrajectoryEvent::Kind::step_rejected, state.t,
                                   "rho_min=" + std::to_string(sig.rho_min)});
            ++rejects_in_a_row;
            continue;
        }

        state = std::move(std::get<FlowState>(res));
        if (!state.rho.allFinite()) {
            throw NumericsError("evolve: non-finite state at t=" + std::to_string(state.t));
        }
        rejects_in_a_row = 0;
        ++accepted;
        final_recorded = false;
        if (accepted % controls.snapshot_stride == 0) {
            record(state);
            final_recorded = true;
        }
    }

    if (!final_recorded) record(state);
    return traj;
}

}  // namespace neckflow
