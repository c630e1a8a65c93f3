/// @file nonpure_map.hpp
/// @brief Parameter boxes and multiparameter nonpure maps u -> (rho(u,.),
/// V_1(u,.), ..., V_m(u,.)), together with the fixture families used to
/// exercise them.
///
/// A NonpureMap is generated lazily from a slice source so that maps over
/// 3-D space grids and fine parameter boxes never have to be held in memory
/// all at once. `materialize()` produces a map backed by stored slices.
#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nonpure/grid.hpp"

namespace nonpure {

/// Parameter domain U, a box in R^m with m in {1, 2, 3}.
class ParamBox : public BoxGrid {
 public:
  ParamBox() = default;
  ParamBox(std::vector<double> lo, std::vector<double> hi, std::vector<int> shape);
  explicit ParamBox(BoxGrid grid);
  static ParamBox with_spacing(std::vector<double> lo, std::vector<double> hi, double du);

  /// Node carries a full centered stencil along every axis.
  bool interior(std::size_t node) const { return face_distance(node) >= 1; }
};

/// Everything a nonpure map provides at one parameter node.
struct MapSlice {
  GridDensity rho;
  /// One field per parameter axis.
  std::vector<GridVectorField> fields;
};

class NonpureMap {
 public:
  using SliceSource = std::function<MapSlice(std::size_t node)>;

  NonpureMap(ParamBox params, BoxGrid space, SliceSource source);
  static NonpureMap from_slices(ParamBox params, BoxGrid space,
                                std::vector<MapSlice> slices);

  const ParamBox& params() const { return params_; }
  const BoxGrid& space() const { return space_; }
  int param_dim() const { return params_.dim(); }

  /// Slice at a parameter node; throws ShapeMismatch if the source returns
  /// a slice inconsistent with the declared grids.
  MapSlice slice(std::size_t node) const;

  /// Copy backed by stored slices.
  NonpureMap materialize() const;

 private:
  ParamBox params_;
  BoxGrid space_;
  SliceSource source_;
};

/// Smooth map X: U -> R^n with its partial derivatives.
struct ParamPath {
  /// Writes X(u) (n entries).
  std::function<void(std::span<const double> u, std::span<double> x)> position;
  /// Writes dX/du_j (u) (n entries).
  std::function<void(std::span<const double> u, int j, std::span<double> dx)> partial;
};

/// Affine path u -> A u (A is n x m).
ParamPath affine_path(const Eigen::MatrixXd& a);

/// rho(u, p) = sigma(p - X(u)) sampled from the analytic bump and rescaled to
/// unit trapezoidal mass per slice; V_j(u, .) = dX/du_j(u), constant in p.
/// Throws SupportOverflow if some translate leaves the margin of `space`.
NonpureMap make_translation_family(ParamPath x, const Bump& sigma, ParamBox params,
                                   BoxGrid space);

/// Same family with sigma given by grid samples and evaluated by
/// multilinear interpolation on its own grid (which becomes the space grid).
NonpureMap make_translation_family(ParamPath x, const GridDensity& sigma,
                                   ParamBox params);

/// Example family rho(u, p) = sigma(p - A u), V_i = column i of A.
NonpureMap make_affine_family(const Eigen::MatrixXd& a, const Bump& sigma,
                              ParamBox params, BoxGrid space);
NonpureMap make_affine_family(const Eigen::MatrixXd& a, const GridDensity& sigma,
                              ParamBox params);

/// Divergence-free perturbation of one field of a planar translation family.
///
/// With psi(u, p) = amplitude * (1 + u_k) * b(p - X(u)), b a bump of
/// `radius` about sigma's center and k = `modulated_axis`, the field
/// V_`field` gains (d_y psi, -d_x psi) / rho. rho times the perturbation is
/// divergence free, so the continuity equations still hold, while the
/// compatibility condition fails wherever psi is nonzero.
struct StreamPerturbation {
  double radius = 0.5;
  double amplitude = 0.05;
  int field = 0;
  int modulated_axis = 1;
  /// Sharpness of the bump b.
  double sharpness = 1.0;
};

/// Requires n = 2 and the psi support inside {rho >= 1e-3 max rho}; throws
/// InvariantViolation otherwise.
NonpureMap make_stream_perturbed_family(ParamPath x, const Bump& sigma, ParamBox params,
                                        BoxGrid space, const StreamPerturbation& perturbation);

/// Change of parameters v -> u = phi(v).
struct Chart {
  std::function<void(std::span<const double> v, std::span<double> u)> map;
  /// Row-major m x m matrix with entry (j, i) = du_j / dv_i.
  std::function<void(std::span<const double> v, std::span<double> jac)> jacobian;
};

/// rho'(v) = rho(phi(v)) and B_i(v) = sum_j du_j/dv_i V_j(phi(v)), both
/// interpolated multilinearly from the nodes of F.
///
/// Throws SingularJacobian if the Jacobian degenerates at a node of
/// `new_params`, InvariantViolation if phi leaves F's parameter box.
NonpureMap reparameterize(const NonpureMap& f, ParamBox new_params, Chart phi);

}  // namespace nonpure
