#include "neckflow/geometry.hpp"

namespace neckflow {

namespace {

// rho with one mirror ghost on each side: ext = [rho_1, rho_0, ..., rho_{n-1}, rho_{n-2}].
Array mirror_extend(const Array& f) {
    const Index n = f.size();
    Array ext(n + 2);
    ext[0] = f[1];
    ext.segment(1, n) = f;
    ext[n + 1] = f[n - 2];
    return ext;
}

}  // namespace

std::pair<Array, Array> derivatives(const FlowState& state) {
    validate_state(state);
    const Index n = state.grid.n;
    const Scalar h = state.grid.h;
    const Array ext = mirror_extend(state.rho);

    Array dr = (ext.segment(2, n) - ext.segment(0, n)) / (2 * h);
    Array ddr = (ext.segment(2, n) - 2 * ext.segment(1, n) + ext.segment(0, n)) / (h * h);
    // The mirror makes the one-sided differences cancel identically; pin the
    // endpoint slopes to the exact zero the ghost construction implies.
    dr[0] = 0;
    dr[n - 1] = 0;
    return {std::move(dr), std::move(ddr)};
}

GeometrySample geometry_sample(const FlowState& state) {
    auto [dr, ddr] = derivatives(state);

    GeometrySample g;
    g.t = state.t;
    g.y = state.rho;
    g.v = gradient_function(dr);
    g.p = (g.y * g.v).inverse();
    g.k = -ddr / g.v.cube();
    g.q = -dr / (g.y * g.v);
    g.H = g.k + g.p;
    g.A2 = g.k.square() + g.p.square();
    g.dr = std::move(dr);
    g.ddr = std::move(ddr);
    return g;
}

Array laplace_beltrami(const FlowState& state, const Array& f) {
    validate_state(state);
    const Index n = state.grid.n;
    if (f.size() != n) {
        throw InputError("laplace_beltrami: f has " + std::to_string(f.size()) +
                         " values for a grid of " + std::to_string(n) + " nodes");
    }
    const Scalar h = state.grid.h;

    auto [dr, ddr] = derivatives(state);
    const Array v = gradient_function(dr);

    const Array rho_ext = mirror_extend(state.rho);
    const Array v_ext = mirror_extend(v);
    const Array f_ext = mirror_extend(f);

    // n + 1 interface fluxes F_{j-1/2}, j = 0..n.
    Array rho_mid = Scalar(0.5) * (rho_ext.segment(0, n + 1) + rho_ext.segment(1, n + 1));
    Array v_mid = Scalar(0.5) * (v_ext.segment(0, n + 1) + v_ext.segment(1, n + 1));
    Array flux = rho_mid * (f_ext.segment(1, n + 1) - f_ext.segment(0, n + 1)) / (h * v_mid);

    return (flux.segment(1, n) - flux.segment(0, n)) / (h * state.rho * v);
}

}  // namespace neckflow
