/// @file convergence.hpp
/// @brief Observed order of convergence from residuals at several step sizes.
#pragma once

#include <vector>

namespace nonpure {

struct OrderFit {
  /// Least-squares slope of log(residual) against log(step); NaN when
  /// `at_floor` is set.
  double order = 0.0;
  /// Some residual is at or below the floating-point floor, so no order can
  /// be read off. This is reported, not treated as failure.
  bool at_floor = false;
};

inline constexpr double kResidualFloor = 1e-13;

/// Throws InvariantViolation unless there are at least two positive steps
/// and as many residuals.
OrderFit fit_order(const std::vector<double>& steps, const std::vector<double>& residuals,
                   double floor = kResidualFloor);

}  // namespace nonpure
