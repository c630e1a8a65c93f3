/// @file grid.hpp
/// @brief Uniform node-centered box grids in R^n (n <= 3), grid fields,
/// second-order difference operators, trapezoidal quadrature and
/// compactly supported bump fixtures.
///
/// Storage is row-major with the last axis fastest. Every operation is
/// pure: the same inputs give bitwise-identical outputs.
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nonpure {

inline constexpr int kMaxDim = 3;

/// Multi-index into a grid; entries past dim() are zero.
using Index = std::array<int, kMaxDim>;

/// Real-valued function of a point in R^n.
using PointFn = std::function<double(std::span<const double>)>;

/// Vector-valued function of a point; writes n components into the output.
using VectorPointFn =
    std::function<void(std::span<const double>, std::span<double>)>;

class BoxGrid {
 public:
  BoxGrid() = default;
  /// Throws InvariantViolation unless lo < hi componentwise and every
  /// axis carries at least kMinNodes nodes.
  BoxGrid(std::vector<double> lo, std::vector<double> hi,
          std::vector<int> shape);

  /// Grid whose spacing is `h` up to rounding of the node count.
  static BoxGrid with_spacing(std::vector<double> lo, std::vector<double> hi,
                              double h);

  static constexpr int kMinNodes = 4;

  int dim() const { return dim_; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double h(int axis) const { return h_[axis]; }
  int shape(int axis) const { return shape_[axis]; }
  std::vector<double> lo_vec() const;
  std::vector<double> hi_vec() const;
  std::vector<int> shape_vec() const;

  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return stride_[axis]; }
  std::size_t flat(const Index& idx) const;
  Index unflat(std::size_t k) const;
  int axis_index(std::size_t k, int axis) const {
    return static_cast<int>((k / stride_[axis]) % shape_[axis]);
  }

  double coord(int axis, int i) const { return lo_[axis] + i * h_[axis]; }
  void point(std::size_t k, std::span<double> out) const;
  std::vector<double> point(std::size_t k) const;

  double min_spacing() const;
  double cell_volume() const;
  /// Product of per-axis trapezoid weights (h inside, h/2 on faces).
  double trapezoid_weight(std::size_t k) const;
  /// Number of node layers between node k and the nearest face.
  int face_distance(std::size_t k) const;

  bool operator==(const BoxGrid& other) const;
  bool operator!=(const BoxGrid& other) const { return !(*this == other); }

 private:
  int dim_ = 0;
  std::array<double, kMaxDim> lo_{};
  std::array<double, kMaxDim> hi_{};
  std::array<double, kMaxDim> h_{};
  std::array<int, kMaxDim> shape_{1, 1, 1};
  std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
  std::size_t size_ = 0;
};

class GridScalar {
 public:
  GridScalar() = default;
  GridScalar(BoxGrid grid, std::vector<double> values);
  /// Zero field.
  explicit GridScalar(BoxGrid grid);

  const BoxGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }

  /// Releases the value buffer; used by builders that construct a new field.
  std::vector<double> take_values() && { return std::move(values_); }

 private:
  BoxGrid grid_;
  std::vector<double> values_;
};

/// Nonnegative, unit-mass scalar field vanishing on the two outermost node
/// layers of every face.
class GridDensity {
 public:
  static constexpr double kMassTolerance = 1e-9;
  static constexpr int kMarginLayers = 2;

  /// Validates all invariants; throws InvariantViolation or SupportOverflow.
  explicit GridDensity(GridScalar values);

  const GridScalar& scalar() const { return values_; }
  const BoxGrid& grid() const { return values_.grid(); }
  std::span<const double> values() const { return values_.values(); }
  double operator[](std::size_t k) const { return values_[k]; }
  operator const GridScalar&() const { return values_; }

 private:
  GridScalar values_;
};

class GridVectorField {
 public:
  GridVectorField() = default;
  /// One component per grid axis.
  explicit GridVectorField(std::vector<GridScalar> components);
  /// Zero field.
  explicit GridVectorField(const BoxGrid& grid);

  const BoxGrid& grid() const { return components_.front().grid(); }
  int dim() const { return static_cast<int>(components_.size()); }
  const GridScalar& component(int axis) const { return components_[axis]; }
  double value(int axis, std::size_t k) const { return components_[axis][k]; }

 private:
  std::vector<GridScalar> components_;
};

// ---------------------------------------------------------------------------
// Sampling and pointwise algebra

GridScalar sample(const BoxGrid& grid, const PointFn& f);
GridVectorField sample_field(const BoxGrid& grid, const VectorPointFn& f);
/// Field equal to `c` at every node.
GridVectorField constant_field(const BoxGrid& grid, std::span<const double> c);

GridScalar operator+(const GridScalar& a, const GridScalar& b);
GridScalar operator-(const GridScalar& a, const GridScalar& b);
GridScalar operator*(const GridScalar& a, const GridScalar& b);
GridScalar operator*(double s, const GridScalar& a);
GridVectorField operator+(const GridVectorField& a, const GridVectorField& b);
GridVectorField operator-(const GridVectorField& a, const GridVectorField& b);
GridVectorField operator*(double s, const GridVectorField& a);
/// Pointwise product f * V.
GridVectorField operator*(const GridScalar& f, const GridVectorField& v);

double max_abs(const GridScalar& f);
double max_abs(const GridVectorField& v);

// ---------------------------------------------------------------------------
// Difference operators. Centered in the interior, second-order one-sided on
// faces; exact on polynomials of degree <= 2 along each axis.

GridScalar partial(const GridScalar& f, int axis);
GridScalar divergence(const GridVectorField& w);
GridVectorField gradient(const GridScalar& f);
/// sum_i V_i d_i f
GridScalar directional(const GridScalar& f, const GridVectorField& v);
/// (V . grad) W - (W . grad) V
GridVectorField lie_bracket(const GridVectorField& v, const GridVectorField& w);

/// Tensor-product trapezoidal rule over the whole box.
double integrate(const GridScalar& f);

/// Multilinear interpolation of grid samples; zero outside the box.
double interpolate(const GridScalar& f, std::span<const double> p);

// ---------------------------------------------------------------------------
// Bumps

/// C-infinity radial profile scale * exp(-a r^2 / (1 - r^2)), r = |p - c| / R,
/// zero for r >= 1. Larger sharpness a concentrates the mass near the center
/// and flattens the edge, which tames the high derivatives there.
struct Bump {
  std::vector<double> center;
  double radius = 1.0;
  double scale = 1.0;
  double sharpness = 1.0;

  double operator()(std::span<const double> p) const;
  /// Profile evaluated at p - shift.
  double shifted(std::span<const double> p, std::span<const double> shift) const;

  /// Bump whose trapezoidal mass on `grid` equals one. Throws
  /// SupportOverflow when the ball leaves the two-layer margin.
  static Bump normalized_on(const BoxGrid& grid, std::vector<double> center,
                            double radius, double sharpness = 1.0);
};

/// Unnormalized profile exp(-a s / (1 - s)) with s = r^2, zero for s >= 1.
double bump_profile(double r_squared, double sharpness = 1.0);

/// Throws SupportOverflow unless ball(center, radius) stays clear of the two
/// outermost node layers of `grid`.
void require_margin(const BoxGrid& grid, std::span<const double> center,
                    double radius);

/// Normalized bump sampled on the grid.
GridDensity make_bump(const BoxGrid& grid, std::vector<double> center,
                      double radius, double sharpness = 1.0);

}  // namespace nonpure
