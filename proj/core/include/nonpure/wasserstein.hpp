/// @file wasserstein.hpp
/// @brief Wasserstein-1 distances: the closed form for densities on a line,
/// an exact rational transportation simplex for small discrete measures, and
/// a metric-derivative estimate for curves of densities.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "nonpure/grid.hpp"

namespace nonpure {

using Rational = boost::multiprecision::cpp_rational;

/// Finitely many weighted atoms in R^n.
class DiscreteMeasure {
 public:
  struct Atom {
    std::vector<double> position;
    double weight = 0.0;
  };

  static constexpr double kWeightTolerance = 1e-12;

  /// Throws InvariantViolation unless every weight is positive, the weights
  /// sum to one within kWeightTolerance and all positions share a dimension.
  explicit DiscreteMeasure(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  int dim() const { return static_cast<int>(atoms_.front().position.size()); }

 private:
  std::vector<Atom> atoms_;
};

/// Integral of |CDF_mu - CDF_nu| with trapezoidal cumulative sums. Throws
/// ShapeMismatch unless both densities live on the same 1-D grid.
double w1_1d(const GridDensity& mu, const GridDensity& nu);

/// Largest atom count accepted by the exact solver on either side.
inline constexpr std::size_t kMaxLpAtoms = 32;

/// Exact optimal transport cost with Euclidean ground cost.
///
/// Weights and costs are converted to rationals without rounding (doubles
/// are dyadic), the weights of each side are rescaled so both total exactly
/// one, and the transportation problem is solved by the simplex method on
/// the transport polytope with Bland's rule. In one dimension the result is
/// exact for the given doubles. Throws SizeOverflow above kMaxLpAtoms atoms
/// and ShapeMismatch on a dimension mismatch.
Rational w1_lp_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// w1_lp_exact rounded to double.
double w1_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Lumps a 1-D density into `bins` equal bins: each atom sits at its bin's
/// center and carries the trapezoidal mass of the bin. Empty bins are
/// dropped. Throws ShapeMismatch unless the interval count is a multiple of
/// `bins`.
DiscreteMeasure discretize(const GridDensity& rho, int bins);

/// Curve t -> rho_t of 1-D densities on a common grid.
class Curve1D {
 public:
  /// Throws ShapeMismatch on grid or length mismatches and
  /// InvariantViolation unless the times increase.
  Curve1D(std::vector<double> times, std::vector<GridDensity> slices);

  const std::vector<double>& times() const { return times_; }
  const std::vector<GridDensity>& slices() const { return slices_; }
  std::size_t size() const { return times_.size(); }

 private:
  std::vector<double> times_;
  std::vector<GridDensity> slices_;
};

/// w1_1d(rho_{i+1}, rho_{i-1}) / (t_{i+1} - t_{i-1}); throws BoundaryIndex on
/// the first and last time index.
double metric_derivative(const Curve1D& curve, std::size_t t_index);

}  // namespace nonpure
