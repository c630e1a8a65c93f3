/// @file nc.hpp
/// @brief Noncommutative counterpart on full matrix algebras M_n(C) with the
/// standard trace: density matrices, commutator continuity equations,
/// conjugation-flow fixtures, the Chevalley-Eilenberg differential, and
/// pullback and Stokes checks for matrix-valued nonpure maps.
///
/// Sign table for the differential, 1-based index i versus 0-based index a:
///
///   term                    1-based          0-based
///   [V_i, w(.. ^V_i ..)]    (-1)^(i-1)       (-1)^a
///   w([V_i, V_j], ..)       (-1)^(i+j)       (-1)^(a+b)
#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nonpure/forms.hpp"
#include "nonpure/nonpure_map.hpp"
#include "nonpure/residual.hpp"

namespace nonpure {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr int kMinMatrixSize = 2;
inline constexpr int kMaxMatrixSize = 6;

/// ab - ba; throws ShapeMismatch on differing sizes.
Matrix commutator(const Matrix& a, const Matrix& b);
Complex trace(const Matrix& a);
/// Largest singular value.
double operator_norm(const Matrix& a);
/// E_ij: one in row i, column j.
Matrix matrix_unit(int n, int i, int j);

struct DensityCheck {
  double hermitian_defect = 0.0;  // max |a - a^*| entrywise
  double min_eigenvalue = 0.0;    // of the Hermitian part
  double trace_defect = 0.0;      // |tr a - 1|
  bool hermitian = false;
  bool positive = false;
  bool unit_trace = false;

  bool ok() const { return hermitian && positive && unit_trace; }
};

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kEigenvalueTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-12;

DensityCheck is_density(const Matrix& a);

/// Scaling and squaring with a truncated Taylor series. Throws NormOverflow
/// when the 1-norm exceeds kMaxExpNorm.
inline constexpr double kMaxExpNorm = 700.0;
Matrix matrix_exp(const Matrix& x);

/// Hermitian positive semidefinite unit-trace matrix of size 2..6.
class DensityMatrix {
 public:
  /// Throws InvariantViolation on any failed invariant.
  explicit DensityMatrix(Matrix m);

  const Matrix& matrix() const { return m_; }
  int size() const { return static_cast<int>(m_.rows()); }
  operator const Matrix&() const { return m_; }

 private:
  Matrix m_;
};

struct NcSlice {
  Matrix rho;
  std::vector<Matrix> fields;
};

/// u -> (rho(u), V_1(u), ..., V_m(u)) sampled on a parameter box.
class NcNonpureMap {
 public:
  /// Throws ShapeMismatch on inconsistent sizes. With `require_states` every
  /// rho(u) must pass is_density (InvariantViolation otherwise).
  NcNonpureMap(ParamBox params, std::vector<NcSlice> slices, bool require_states = true);

  const ParamBox& params() const { return params_; }
  int param_dim() const { return params_.dim(); }
  int matrix_size() const { return n_; }
  const NcSlice& slice(std::size_t node) const { return slices_[node]; }
  std::size_t size() const { return slices_.size(); }

 private:
  ParamBox params_;
  int n_ = 0;
  std::vector<NcSlice> slices_;
};

struct ConjugationOptions {
  /// Require skew-Hermitian generators, so that every rho(u) is a state.
  bool skew_hermitian = true;
};

/// U(u) = exp(-u_1 X_1) ... exp(-u_m X_m), rho(u) = U rho0 U^-1 and
/// V_j = -(d_j U) U^-1 = P_j X_j P_j^-1 with P_j the product of the first
/// j - 1 factors. These satisfy d_j rho + [V_j, rho] = 0 and the flatness
/// condition d_j V_i - d_i V_j = [V_i, V_j] exactly.
NcNonpureMap make_conjugation_family(const std::vector<Matrix>& generators,
                                     const DensityMatrix& rho0, ParamBox params,
                                     const ConjugationOptions& options = {});

/// Coefficients c_jd(u) of the polynomial added to V_j.
using RhoPolynomialCoefficients =
    std::function<std::vector<std::vector<Complex>>(std::span<const double> u)>;

/// V_j(u) += sum_d c_jd(u) rho(u)^d. The added terms commute with rho, so
/// the continuity equations survive. The curvature changes by
/// sum_d (d_j c_id - d_i c_jd) rho^d, which also commutes with rho.
NcNonpureMap perturb_with_rho_polynomials(const NcNonpureMap& f,
                                          const RhoPolynomialCoefficients& coefficients);

/// Constant coefficients. Since d_i p(rho) = [p(rho), V_i] along a solution,
/// this is a pure gauge change: the family stays flat.
NcNonpureMap perturb_with_rho_polynomials(const NcNonpureMap& f,
                                          const std::vector<std::vector<Complex>>& coefficients);

/// max || d_j rho + [V_j, rho] || (operator norm) over interior nodes.
ResidualReport nc_continuity_residual(const NcNonpureMap& f, int axis);

/// max || d_j V_i - d_i V_j - [V_i, V_j] ||; ShapeMismatch for i == j.
ResidualReport nc_compatibility_residual(const NcNonpureMap& f, int i, int j);

/// max || [d_j V_i - d_i V_j - [V_i, V_j], rho] ||. Checks both continuity
/// residuals against `continuity_tol` first (PreconditionViolated).
ResidualReport nc_mixed_theorem_residual(const NcNonpureMap& f, int i, int j,
                                         double continuity_tol);

/// Maximum over all axis pairs; all-zero report when m = 1.
ResidualReport nc_mixed_theorem_residual(const NcNonpureMap& f, double continuity_tol);

/// max over tests f of |d_j tr(rho f) - tr(rho [V_j, f])|.
ResidualReport trace_duality_residual(const NcNonpureMap& f, int axis,
                                      const std::vector<Matrix>& tests);

/// Alternating k-linear map A^k -> A given by an evaluator.
class NcForm {
 public:
  using Evaluator = std::function<Matrix(const std::vector<Matrix>&)>;

  NcForm(int degree, Evaluator evaluator, std::string label = {});
  /// Degree-0 form with value a.
  static NcForm constant(Matrix a, std::string label = {});

  int degree() const { return k_; }
  const std::string& label() const { return label_; }
  /// Throws DegreeError on an argument-count mismatch.
  Matrix operator()(const std::vector<Matrix>& args) const;

 private:
  int k_;
  Evaluator eval_;
  std::string label_;
};

inline constexpr int kMaxNcDegree = 3;

/// dw(V_1..V_{k+1}) = sum_i (-1)^(i-1) [V_i, w(.. ^V_i ..)]
///                  + sum_{i<j} (-1)^(i+j) w([V_i, V_j], .. ^V_i .. ^V_j ..).
/// Throws DegreeError for degree above kMaxNcDegree.
NcForm ce_differential(const NcForm& omega);

/// Complex form on a parameter box, stored as real and imaginary parts.
struct ComplexParamForm {
  ParamForm re;
  ParamForm im;
};

/// (F* w)_J(u) = tr(rho(u) w(V_{j_1}(u), ..., V_{j_k}(u))). Throws
/// DegreeError when the degree exceeds m.
ComplexParamForm nc_pullback(const NcNonpureMap& f, const NcForm& omega);

/// max |F* dw - d F* w| (complex modulus) over interior nodes and indices.
ResidualReport nc_naturality_residual(const NcNonpureMap& f, const NcForm& omega);

struct NcStokesResult {
  Complex lhs;
  Complex rhs;
  double diff = 0.0;
};

/// Box integral of F* dw against the boundary integral of F* w, compared as
/// complex numbers. Throws DegreeError unless w has degree m - 1.
NcStokesResult nc_stokes_residual(const NcNonpureMap& f, const NcForm& omega);

}  // namespace nonpure
