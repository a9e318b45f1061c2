#pragma once

#include "neckflow/types.hpp"

namespace neckflow {

/// Uniform discretization of the axis interval [a, b].
struct ProfileGrid {
    Scalar a = 0;
    Scalar b = 1;
    Index n = 0;
    Scalar h = 0;    ///< spacing (b - a) / (n - 1)
    Array nodes;     ///< x_j = a + j h, strictly increasing
};

/// Profile curve sampled on a grid at one instant. The surface is the
/// rotation of the graph of rho about the axis; rho > 0 at every node.
/// Neumann ends are realized by mirror ghost nodes (rho_{-1} = rho_1,
/// rho_n = rho_{n-2}) wherever a stencil reaches past the boundary.
struct FlowState {
    ProfileGrid grid;
    Scalar t = 0;
    Array rho;
};

ProfileGrid make_grid(Scalar a, Scalar b, Index n);

/// Throws DegenerateStateError unless rho is positive, finite and sized to
/// the grid.
void validate_state(const FlowState& state);

/// Refine a state onto n_new >= n nodes over the same interval by cubic
/// interpolation through existing nodes (mirror ghosts past the ends).
/// Values that undershoot the bracketing node values are clamped up to the
/// local bracket minimum so the profile stays positive. Time is unchanged.
FlowState resample(const FlowState& state, Index n_new);

}  // namespace neckflow
