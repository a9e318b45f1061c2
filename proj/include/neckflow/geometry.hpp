#pragma once

#include "neckflow/grid.hpp"

namespace neckflow {

/// Pointwise geometry of the rotation surface generated by a profile.
/// All fields are functions of (rho, rho', rho'') alone:
///   y  = rho                       height
///   v  = sqrt(1 + rho'^2)          gradient function
///   p  = 1 / (rho v)               rotational principal curvature (> 0)
///   k  = -rho'' / v^3              profile principal curvature
///   q  = -rho' / (rho v)           <nu, i1> / y
///   H  = k + p                     mean curvature (cylinder: H = 1/r > 0)
///   A2 = k^2 + p^2                 |A|^2
struct GeometrySample {
    Scalar t = 0;
    Array y, dr, ddr, v, p, q, k, H, A2;
};

/// Expression-friendly kernels shared by the sample and the steppers.
template <typename Derived>
auto gradient_function(const Eigen::ArrayBase<Derived>& dr) {
    return (Scalar(1) + dr.square()).sqrt();
}

/// Central differences on the mirror-extended profile.
/// dr vanishes exactly at both boundary nodes.
std::pair<Array, Array> derivatives(const FlowState& state);

GeometrySample geometry_sample(const FlowState& state);

/// Conservative-form discrete Laplace-Beltrami of a per-node scalar f:
///   (Delta f)_j = (F_{j+1/2} - F_{j-1/2}) / (h rho_j v_j),
///   F_{j+1/2}   = rho_{j+1/2} (f_{j+1} - f_j) / (h v_{j+1/2}),
/// midpoints by arithmetic average, boundary fluxes via mirror ghosts.
/// The ghost extension is even, which is the correct parity for scalars
/// that mirror across the Neumann planes (y, v, H, |A|^2, ...).
Array laplace_beltrami(const FlowState& state, const Array& f);

}  // namespace neckflow
