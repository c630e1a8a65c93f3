#pragma once

#include <cstddef>
#include <vector>

#include "nonpure/grid.hpp"

namespace nonpure {

struct ResidualLocation {
  std::vector<int> param_index;
  std::vector<int> space_index;
};

/// Raw residual statistics; thresholds are applied by callers.
struct ResidualReport {
  double max_abs = 0.0;
  /// sqrt(sum r^2 * w) with w the product of space and parameter cell volumes.
  double l2 = 0.0;
  ResidualLocation location;
  double h_used = 0.0;
  double du_used = 0.0;
  std::size_t samples = 0;
};

/// Collects nodewise residual magnitudes. Grids may be null when the
/// residual has no space (matrix-valued maps) or no parameter (single
/// fields) component.
class ResidualAccumulator {
 public:
  ResidualAccumulator(const BoxGrid* params, const BoxGrid* space);

  void add(double r, std::size_t param_node, std::size_t space_node);
  ResidualReport finish() const;

 private:
  const BoxGrid* params_;
  const BoxGrid* space_;
  double weight_ = 1.0;
  double sum_sq_ = 0.0;
  double max_ = 0.0;
  std::size_t count_ = 0;
  std::size_t arg_param_ = 0;
  std::size_t arg_space_ = 0;
};

}  // namespace nonpure
