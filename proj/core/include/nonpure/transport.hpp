/// @file transport.hpp
/// @brief Explicit upwind finite-volume solver for the continuity equation
/// d rho / dt + div(rho V) = 0 on a box grid.
#pragma once

#include <functional>
#include <vector>

#include "nonpure/grid.hpp"

namespace nonpure {

/// Velocity at time t, on the density's grid.
using VelocityFn = std::function<GridVectorField(double t)>;

struct TransportOptions {
  /// Largest value tolerated on the innermost margin layer before the
  /// support is considered to have left the box.
  double overflow_threshold = 1e-12;
};

/// Densities rho(t_0), ..., rho(t_N) for an increasing time grid.
///
/// Each step is forward Euler with first-order upwind fluxes; the face
/// velocity is the mean of the two adjacent nodal values. Faces touching the
/// two-layer margin are closed walls, so the nodal mass sum is conserved up
/// to rounding and margin values stay exactly zero.
///
/// Throws CflViolation when max|V| dt > 0.5 min h, SupportOverflow when the
/// layer just inside the margin exceeds the overflow threshold, and
/// InvariantViolation on a negative value or a non-increasing time grid.
std::vector<GridDensity> transport_evolve(const GridDensity& rho0, const VelocityFn& velocity,
                                          const std::vector<double>& t_grid,
                                          const TransportOptions& options = {});

}  // namespace nonpure
