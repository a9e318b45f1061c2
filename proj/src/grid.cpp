#include "neckflow/grid.hpp"

#include <algorithm>
#include <cmath>

namespace neckflow {

ProfileGrid make_grid(Scalar a, Scalar b, Index n) {
    if (!(a < b)) {
        throw ConfigError("grid: left endpoint a must be strictly below b (got a=" +
                          std::to_string(a) + ", b=" + std::to_string(b) + ")");
    }
    if (n < 5) {
        throw ConfigError("grid: node count n must be at least 5 (got " + std::to_string(n) + ")");
    }
    ProfileGrid g;
    g.a = a;
    g.b = b;
    g.n = n;
    g.h = (b - a) / static_cast<Scalar>(n - 1);
    g.nodes = Array::NullaryExpr(n, [&](Index j) { return a + static_cast<Scalar>(j) * g.h; });
    return g;
}

void validate_state(const FlowState& state) {
    if (state.rho.size() != state.grid.n) {
        throw DegenerateStateError("state: rho has " + std::to_string(state.rho.size()) +
                                   " values for a grid of " + std::to_string(state.grid.n) + " nodes");
    }
    if (!state.rho.allFinite() || !std::isfinite(state.t)) {
        throw DegenerateStateError("state: non-finite entries at t=" + std::to_string(state.t));
    }
    if ((state.rho <= Scalar(0)).any()) {
        Index j;
        state.rho.minCoeff(&j);
        throw DegenerateStateError("state: rho <= 0 at node " + std::to_string(j) +
                                   " (t=" + std::to_string(state.t) + ")");
    }
}

namespace {

// Value at source index j with mirror ghosts (j = -1 maps to 1, j = n to n-2).
inline Scalar mirrored(const Array& rho, Index j) {
    const Index n = rho.size();
    if (j < 0) return rho[-j];
    if (j >= n) return rho[2 * (n - 1) - j];
    return rho[j];
}

}  // namespace

FlowState resample(const FlowState& state, Index n_new) {
    validate_state(state);
    const Index n = state.grid.n;
    if (n_new < n) {
        throw ConfigError("resample: coarsening is not supported (n'=" + std::to_string(n_new) +
                          " < n=" + std::to_string(n) + ")");
    }

    FlowState out;
    out.grid = make_grid(state.grid.a, state.grid.b, n_new);
    out.t = state.t;
    out.rho.resize(n_new);

    const Scalar h = state.grid.h;
    const Scalar a = state.grid.a;
    for (Index j = 0; j < n_new; ++j) {
        const Scalar x = out.grid.nodes[j];
        // Bracketing source interval [i, i+1].
        Index i = static_cast<Index>(std::floor((x - a) / h));
        i = std::clamp<Index>(i, 0, n - 2);

        // Cubic Lagrange stencil {i-1, i, i+1, i+2} with mirror ghosts.
        Scalar xs[4], ys[4];
        for (int s = 0; s < 4; ++s) {
            const Index js = i - 1 + s;
            xs[s] = a + static_cast<Scalar>(js) * h;
            ys[s] = mirrored(state.rho, js);
        }
        Scalar val = 0;
        for (int s = 0; s < 4; ++s) {
            Scalar w = 1;
            for (int r = 0; r < 4; ++r) {
                if (r == s) continue;
                w *= (x - xs[r]) / (xs[s] - xs[r]);
            }
            val += w * ys[s];
        }
        const Scalar bracket_min = std::min(state.rho[i], state.rho[i + 1]);
        out.rho[j] = std::max(val, bracket_min);
    }
    return out;
}

}  // namespace neckflow
