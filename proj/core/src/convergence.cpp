#include "nonpure/convergence.hpp"

#include <cmath>
#include <limits>

#include "nonpure/error.hpp"

namespace nonpure {

OrderFit fit_order(const std::vector<double>& steps, const std::vector<double>& residuals,
                   double floor) {
  if (steps.size() < 2 || steps.size() != residuals.size()) {
    throw InvariantViolation("fit_order: need at least two (step, residual) pairs");
  }
  OrderFit fit;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0)) throw InvariantViolation("fit_order: steps must be positive");
    if (std::abs(residuals[i]) <= floor) fit.at_floor = true;
  }
  if (fit.at_floor) {
    fit.order = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double n = static_cast<double>(steps.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double x = std::log(steps[i]);
    const double y = std::log(std::abs(residuals[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

}  // namespace nonpure
