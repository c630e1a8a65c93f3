/// @file continuity.hpp
/// @brief Residual checks for nonpure maps on R^n: continuity equations,
/// the zero-curvature compatibility condition, the divergence-bracket
/// identity and the mixed-partials theorem.
///
/// Parameter derivatives are centered differences; every report covers
/// parameter nodes that are interior along all axes.
#pragma once

#include "nonpure/grid.hpp"
#include "nonpure/nonpure_map.hpp"
#include "nonpure/residual.hpp"

namespace nonpure {

/// max |d rho / du_j + div(rho V_j)|
ResidualReport continuity_residual(const NonpureMap& f, int axis);

/// max |dV_i/du_j - dV_j/du_i - [V_i, V_j]| over components. Throws
/// ShapeMismatch for i == j or axes out of range.
ResidualReport compatibility_residual(const NonpureMap& f, int i, int j);

/// Maximum over all axis pairs; all-zero report when m = 1.
ResidualReport compatibility_residual(const NonpureMap& f);

/// Residual of div(div(fW) V) - div(div(fV) W) = div(f [V, W]) on nodes at
/// least two layers from every face. Throws SupportOverflow unless f
/// vanishes on the two-layer margin.
ResidualReport divergence_identity_residual(const GridScalar& f, const GridVectorField& v,
                                            const GridVectorField& w);

/// max |div(rho (dV_i/du_j - dV_j/du_i - [V_i, V_j]))|.
///
/// The identity follows from the continuity equations alone, so the
/// continuity residual on both axes is checked first and
/// PreconditionViolated is thrown if either exceeds `continuity_tol`.
ResidualReport mixed_theorem_residual(const NonpureMap& f, int i, int j, double continuity_tol);

}  // namespace nonpure
