/// @file forms.hpp
/// @brief Differential forms on R^n with callable coefficients, forms sampled
/// on parameter boxes, exterior derivatives, oriented box and boundary
/// integrals, and pullback through nonpure maps.
///
/// Multi-indices are 0-based increasing axis lists in lexicographic order.
/// On a parameter box [lo, hi]^m the orientation is the one making
/// du_1 ^ ... ^ du_m positive; see OrientedBoxFace for the boundary.
#pragma once

#include <span>
#include <vector>

#include "nonpure/grid.hpp"
#include "nonpure/nonpure_map.hpp"
#include "nonpure/residual.hpp"

namespace nonpure {

using MultiIndex = std::vector<int>;

/// All increasing k-subsets of {0, ..., n-1}, lexicographically ordered.
std::vector<MultiIndex> increasing_multi_indices(int n, int k);

/// Position of `index` in increasing_multi_indices(n, index.size()).
std::size_t multi_index_rank(int n, const MultiIndex& index);

/// A coefficient function with optional analytic partial derivatives. When
/// `partials` is empty, derivatives are taken by centered differences.
struct ScalarFunction {
  PointFn value;
  /// Either empty or one entry per space axis.
  std::vector<ScalarFunction> partials;

  double operator()(std::span<const double> p) const { return value(p); }
};

/// d f / dp_axis: the analytic partial when present, else a centered
/// difference of step h_d.
ScalarFunction derivative(const ScalarFunction& f, int axis, int n, double h_d);

/// k-form on R^n: one coefficient per increasing multi-index.
class SpaceForm {
 public:
  /// Throws DegreeError unless 0 <= k <= n + 1 and n <= 3, ShapeMismatch
  /// unless there are C(n, k) coefficients.
  SpaceForm(int n, int k, std::vector<ScalarFunction> coefficients, double h_d = 1e-4);
  static SpaceForm zero(int n, int k);

  int dim() const { return n_; }
  int degree() const { return k_; }
  double h_d() const { return h_d_; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const ScalarFunction& coefficient(std::size_t i) const { return coefficients_[i]; }
  std::size_t size() const { return coefficients_.size(); }

 private:
  int n_;
  int k_;
  double h_d_;
  std::vector<MultiIndex> indices_;
  std::vector<ScalarFunction> coefficients_;
};

/// sum_I omega_I(p) det(vectors restricted to the rows in I). Throws
/// DegreeError when the vector count differs from the degree.
double eval_space_form(const SpaceForm& omega, std::span<const double> p,
                       const std::vector<std::vector<double>>& vectors);

/// Exterior derivative. Coefficient I of d omega is
/// sum_a (-1)^a d_{I_a} omega_{I without I_a}; second partials of the result
/// are analytic whenever omega's coefficients carry them.
SpaceForm d_space(const SpaceForm& omega);

/// Real k-form on a parameter box, sampled at every node.
class ParamForm {
 public:
  ParamForm() = default;
  /// All-zero form. Throws DegreeError unless 0 <= k <= m.
  ParamForm(ParamBox params, int k);
  /// `coefficients[i][node]` for the i-th increasing multi-index.
  ParamForm(ParamBox params, int k, std::vector<std::vector<double>> coefficients);

  const ParamBox& params() const { return params_; }
  int degree() const { return k_; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  std::span<const double> coefficients(std::size_t i) const { return coefficients_[i]; }
  double at(std::size_t i, std::size_t node) const { return coefficients_[i][node]; }
  double& at(std::size_t i, std::size_t node) { return coefficients_[i][node]; }

 private:
  ParamBox params_;
  int k_ = 0;
  std::vector<MultiIndex> indices_;
  std::vector<std::vector<double>> coefficients_;
};

/// Exterior derivative in u. Centered differences at interior nodes and
/// second-order one-sided differences on the box faces; only the face
/// values are used by box integrals, residual checks read interior nodes.
/// Throws DegreeError unless degree < m.
ParamForm d_param(const ParamForm& alpha);

/// The same form written in relabelled coordinates w_a = u_{perm[a]}; the box
/// is permuted accordingly. Integrating over the relabelled box picks up the
/// sign of the permutation.
ParamForm permute_axes(const ParamForm& alpha, const std::vector<int>& perm);

/// Face {u_axis = lo or hi} of a parameter box with its induced orientation.
///
/// With 1-based axis i, the hi face has sign (-1)^(i-1) and the lo face
/// (-1)^i, so that for m = 2 the boundary runs counterclockwise:
///
///   axis 1 hi (+1), axis 1 lo (-1), axis 2 hi (-1), axis 2 lo (+1).
///
/// In code the axis is 0-based and the hi sign is (-1)^axis.
struct OrientedBoxFace {
  int axis = 0;
  bool hi = true;

  int sign() const;
};

/// The 2m faces in the order (axis 0 lo, axis 0 hi, axis 1 lo, ...).
std::vector<OrientedBoxFace> box_faces(int m);

/// Trapezoidal integral of an m-form over its box. Throws DegreeError
/// unless degree == m.
double integrate_box(const ParamForm& alpha);

/// Sum over faces of sign * trapezoidal integral of the coefficient whose
/// multi-index omits the face axis. Throws DegreeError unless degree == m - 1.
double integrate_boundary(const ParamForm& alpha);

/// (F* omega)_J(u) = int rho(u, p) omega(p; V_{j_1}(u, p), ..., V_{j_k}(u, p)) dp
/// by trapezoidal quadrature over the support of rho. Throws DegreeError when
/// the degree exceeds m and ShapeMismatch when omega's dimension differs
/// from the space's.
ParamForm pullback(const NonpureMap& f, const SpaceForm& omega);

/// Pullbacks of several forms computed in a single pass over the slices.
std::vector<ParamForm> pullback(const NonpureMap& f, const std::vector<SpaceForm>& forms);

/// max |F* d omega - d F* omega| over interior parameter nodes and
/// multi-indices.
ResidualReport naturality_residual(const NonpureMap& f, const SpaceForm& omega);

struct StokesResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double diff = 0.0;
};

/// lhs = integral over the box of F* d omega, rhs = boundary integral of
/// F* omega. Throws DegreeError unless omega has degree m - 1.
StokesResult stokes_residual(const NonpureMap& f, const SpaceForm& omega);

}  // namespace nonpure
