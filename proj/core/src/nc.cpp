#include "nonpure/nc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "nonpure/error.hpp"

namespace nonpure {

namespace {

void require_same_size(const Matrix& a, const Matrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << where << ": " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw ShapeMismatch(os.str());
  }
}

}  // namespace

Matrix commutator(const Matrix& a, const Matrix& b) {
  require_same_size(a, b, "commutator");
  if (a.rows() != a.cols()) throw ShapeMismatch("commutator: matrices must be square");
  return a * b - b * a;
}

Complex trace(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("trace: matrix must be square");
  return a.trace();
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

Matrix matrix_unit(int n, int i, int j) {
  if (i < 0 || j < 0 || i >= n || j >= n) throw ShapeMismatch("matrix_unit: index out of range");
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

DensityCheck is_density(const Matrix& a) {
  DensityCheck c;
  if (a.rows() != a.cols() || a.rows() == 0) return c;
  c.hermitian_defect = (a - a.adjoint()).cwiseAbs().maxCoeff();
  const Matrix herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  c.trace_defect = std::abs(a.trace() - Complex(1.0, 0.0));
  c.hermitian = c.hermitian_defect <= kHermitianTolerance;
  c.positive = c.min_eigenvalue >= -kEigenvalueTolerance;
  c.unit_trace = c.trace_defect <= kTraceTolerance;
  return c;
}

Matrix matrix_exp(const Matrix& x) {
  if (x.rows() != x.cols()) throw ShapeMismatch("matrix_exp: matrix must be square");
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm) || norm > kMaxExpNorm) {
    std::ostringstream os;
    os << "matrix_exp: 1-norm " << norm << " exceeds " << kMaxExpNorm;
    throw NormOverflow(os.str());
  }
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix y = x / std::ldexp(1.0, squarings);
  // ||y|| <= 1/2, so 20 terms leave a remainder below 1e-25.
  const Eigen::Index n = x.rows();
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = term * y / static_cast<double>(k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < kMinMatrixSize || m_.rows() > kMaxMatrixSize) {
    std::ostringstream os;
    os << "DensityMatrix: size " << m_.rows() << "x" << m_.cols() << " outside 2..6";
    throw InvariantViolation(os.str());
  }
  const DensityCheck c = is_density(m_);
  if (!c.ok()) {
    std::ostringstream os;
    os << "DensityMatrix: hermitian defect " << c.hermitian_defect << ", min eigenvalue "
       << c.min_eigenvalue << ", trace defect " << c.trace_defect;
    throw InvariantViolation(os.str());
  }
}

// ---------------------------------------------------------------------------
// Maps and fixtures

NcNonpureMap::NcNonpureMap(ParamBox params, std::vector<NcSlice> slices, bool require_states)
    : params_(std::move(params)), slices_(std::move(slices)) {
  if (slices_.size() != params_.size()) {
    throw ShapeMismatch("NcNonpureMap: slice count does not match parameter nodes");
  }
  n_ = static_cast<int>(slices_.front().rho.rows());
  for (const NcSlice& s : slices_) {
    if (s.rho.rows() != n_ || s.rho.cols() != n_) {
      throw ShapeMismatch("NcNonpureMap: density sizes differ");
    }
    if (static_cast<int>(s.fields.size()) != params_.dim()) {
      throw ShapeMismatch("NcNonpureMap: expected one field per parameter axis");
    }
    for (const Matrix& v : s.fields) {
      if (v.rows() != n_ || v.cols() != n_) throw ShapeMismatch("NcNonpureMap: field size");
    }
    if (require_states) DensityMatrix check(s.rho);
  }
}

NcNonpureMap make_conjugation_family(const std::vector<Matrix>& generators,
                                     const DensityMatrix& rho0, ParamBox params,
                                     const ConjugationOptions& options) {
  const int m = params.dim();
  const int n = rho0.size();
  if (static_cast<int>(generators.size()) != m) {
    throw ShapeMismatch("make_conjugation_family: one generator per parameter axis");
  }
  for (const Matrix& x : generators) {
    if (x.rows() != n || x.cols() != n) {
      throw ShapeMismatch("make_conjugation_family: generator size");
    }
    if (options.skew_hermitian && (x + x.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
      throw InvariantViolation("make_conjugation_family: generator is not skew-Hermitian");
    }
  }
  const Matrix identity = Matrix::Identity(n, n);
  std::vector<NcSlice> slices;
  slices.reserve(params.size());
  for (std::size_t node = 0; node < params.size(); ++node) {
    const std::vector<double> u = params.point(node);
    NcSlice s;
    Matrix prefix = identity;      // P_j
    Matrix prefix_inv = identity;  // P_j^-1
    for (int j = 0; j < m; ++j) {
      s.fields.push_back(prefix * generators[j] * prefix_inv);
      prefix = prefix * matrix_exp(-u[j] * generators[j]);
      prefix_inv = matrix_exp(u[j] * generators[j]) * prefix_inv;
    }
    if ((prefix * prefix_inv - identity).cwiseAbs().maxCoeff() > 1e-9) {
      throw InvariantViolation("make_conjugation_family: U(u) is numerically singular");
    }
    s.rho = prefix * rho0.matrix() * prefix_inv;
    if (options.skew_hermitian) s.rho = 0.5 * (s.rho + s.rho.adjoint()).eval();
    slices.push_back(std::move(s));
  }
  return NcNonpureMap(std::move(params), std::move(slices), options.skew_hermitian);
}

NcNonpureMap perturb_with_rho_polynomials(const NcNonpureMap& f,
                                          const RhoPolynomialCoefficients& coefficients) {
  const int m = f.param_dim();
  std::vector<NcSlice> slices;
  slices.reserve(f.size());
  const int n = f.matrix_size();
  std::vector<double> u(m);
  for (std::size_t node = 0; node < f.size(); ++node) {
    NcSlice s = f.slice(node);
    f.params().point(node, u);
    const auto c = coefficients(u);
    if (static_cast<int>(c.size()) != m) {
      throw ShapeMismatch("perturb_with_rho_polynomials: one polynomial per field");
    }
    for (int j = 0; j < m; ++j) {
      Matrix power = Matrix::Identity(n, n);
      for (const Complex& cd : c[j]) {
        s.fields[j] += cd * power;
        power = power * s.rho;
      }
    }
    slices.push_back(std::move(s));
  }
  return NcNonpureMap(f.params(), std::move(slices), false);
}

NcNonpureMap perturb_with_rho_polynomials(const NcNonpureMap& f,
                                          const std::vector<std::vector<Complex>>& coefficients) {
  if (static_cast<int>(coefficients.size()) != f.param_dim()) {
    throw ShapeMismatch("perturb_with_rho_polynomials: one polynomial per field");
  }
  return perturb_with_rho_polynomials(
      f, [&coefficients](std::span<const double>) { return coefficients; });
}

// ---------------------------------------------------------------------------
// Residuals

namespace {

void require_axis(const NcNonpureMap& f, int axis) {
  if (axis < 0 || axis >= f.param_dim()) {
    std::ostringstream os;
    os << "parameter axis " << axis << " out of range for m = " << f.param_dim();
    throw ShapeMismatch(os.str());
  }
}

Matrix centered_field(const NcNonpureMap& f, std::size_t node, int field, int axis) {
  const std::size_t s = f.params().stride(axis);
  return (f.slice(node + s).fields[field] - f.slice(node - s).fields[field]) /
         (2.0 * f.params().h(axis));
}

Matrix curvature(const NcNonpureMap& f, std::size_t node, int i, int j) {
  const NcSlice& here = f.slice(node);
  return centered_field(f, node, i, j) - centered_field(f, node, j, i) -
         commutator(here.fields[i], here.fields[j]);
}

template <typename Fn>
ResidualReport over_interior(const NcNonpureMap& f, Fn&& residual) {
  const ParamBox& params = f.params();
  ResidualAccumulator acc(&params, nullptr);
  for (std::size_t node = 0; node < params.size(); ++node) {
    if (params.interior(node)) acc.add(residual(node), node, 0);
  }
  return acc.finish();
}

}  // namespace

ResidualReport nc_continuity_residual(const NcNonpureMap& f, int axis) {
  require_axis(f, axis);
  const std::size_t s = f.params().stride(axis);
  const double du = f.params().h(axis);
  return over_interior(f, [&](std::size_t node) {
    const NcSlice& here = f.slice(node);
    const Matrix drho = (f.slice(node + s).rho - f.slice(node - s).rho) / (2.0 * du);
    return operator_norm(drho + commutator(here.fields[axis], here.rho));
  });
}

ResidualReport nc_compatibility_residual(const NcNonpureMap& f, int i, int j) {
  require_axis(f, i);
  require_axis(f, j);
  if (i == j) throw ShapeMismatch("nc_compatibility_residual: axes must differ");
  return over_interior(f, [&](std::size_t node) { return operator_norm(curvature(f, node, i, j)); });
}

ResidualReport nc_mixed_theorem_residual(const NcNonpureMap& f, int i, int j,
                                         double continuity_tol) {
  require_axis(f, i);
  require_axis(f, j);
  if (i == j) throw ShapeMismatch("nc_mixed_theorem_residual: axes must differ");
  for (int axis : {i, j}) {
    const ResidualReport c = nc_continuity_residual(f, axis);
    if (!(c.max_abs <= continuity_tol)) {
      std::ostringstream os;
      os.precision(6);
      os << "nc_mixed_theorem_residual: continuity residual " << c.max_abs << " on axis "
         << axis << " exceeds " << continuity_tol;
      throw PreconditionViolated(os.str(), c.max_abs);
    }
  }
  return over_interior(f, [&](std::size_t node) {
    return operator_norm(commutator(curvature(f, node, i, j), f.slice(node).rho));
  });
}

ResidualReport nc_mixed_theorem_residual(const NcNonpureMap& f, double continuity_tol) {
  const int m = f.param_dim();
  ResidualReport worst;
  worst.du_used = f.params().min_spacing();
  bool first = true;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      ResidualReport r = nc_mixed_theorem_residual(f, i, j, continuity_tol);
      if (first || r.max_abs > worst.max_abs) worst = r;
      first = false;
    }
  }
  return worst;
}

ResidualReport trace_duality_residual(const NcNonpureMap& f, int axis,
                                      const std::vector<Matrix>& tests) {
  require_axis(f, axis);
  for (const Matrix& t : tests) {
    if (t.rows() != f.matrix_size() || t.cols() != f.matrix_size()) {
      throw ShapeMismatch("trace_duality_residual: test matrix size");
    }
  }
  const std::size_t s = f.params().stride(axis);
  const double du = f.params().h(axis);
  return over_interior(f, [&](std::size_t node) {
    const NcSlice& here = f.slice(node);
    double r = 0.0;
    for (const Matrix& t : tests) {
      const Complex lhs =
          ((f.slice(node + s).rho * t).trace() - (f.slice(node - s).rho * t).trace()) / (2.0 * du);
      const Complex rhs = (here.rho * commutator(here.fields[axis], t)).trace();
      r = std::max(r, std::abs(lhs - rhs));
    }
    return r;
  });
}

// ---------------------------------------------------------------------------
// Forms

NcForm::NcForm(int degree, Evaluator evaluator, std::string label)
    : k_(degree), eval_(std::move(evaluator)), label_(std::move(label)) {
  if (k_ < 0 || k_ > kMaxNcDegree + 1) throw DegreeError("NcForm: degree out of range");
  if (!eval_) throw InvariantViolation("NcForm: empty evaluator");
}

NcForm NcForm::constant(Matrix a, std::string label) {
  return NcForm(0, [a = std::move(a)](const std::vector<Matrix>&) { return a; },
                std::move(label));
}

Matrix NcForm::operator()(const std::vector<Matrix>& args) const {
  if (static_cast<int>(args.size()) != k_) {
    std::ostringstream os;
    os << "NcForm: " << args.size() << " arguments for a " << k_ << "-form";
    throw DegreeError(os.str());
  }
  return eval_(args);
}

NcForm ce_differential(const NcForm& omega) {
  const int k = omega.degree();
  if (k > kMaxNcDegree) {
    std::ostringstream os;
    os << "ce_differential: degree " << k << " above " << kMaxNcDegree;
    throw DegreeError(os.str());
  }
  auto eval = [omega, k](const std::vector<Matrix>& v) {
    Matrix out = Matrix::Zero(v[0].rows(), v[0].cols());
    std::vector<Matrix> rest;
    rest.reserve(k);
    for (int a = 0; a <= k; ++a) {
      rest.clear();
      for (int c = 0; c <= k; ++c) {
        if (c != a) rest.push_back(v[c]);
      }
      const double sign = (a % 2 == 0) ? 1.0 : -1.0;
      out += sign * commutator(v[a], omega(rest));
    }
    for (int a = 0; a <= k; ++a) {
      for (int b = a + 1; b <= k; ++b) {
        rest.clear();
        rest.push_back(commutator(v[a], v[b]));
        for (int c = 0; c <= k; ++c) {
          if (c != a && c != b) rest.push_back(v[c]);
        }
        const double sign = ((a + b) % 2 == 0) ? 1.0 : -1.0;
        out += sign * omega(rest);
      }
    }
    return out;
  };
  return NcForm(k + 1, std::move(eval), omega.label().empty() ? "" : "d(" + omega.label() + ")");
}

ComplexParamForm nc_pullback(const NcNonpureMap& f, const NcForm& omega) {
  const ParamBox& params = f.params();
  const int k = omega.degree();
  if (k > params.dim()) {
    std::ostringstream os;
    os << "nc_pullback: degree " << k << " exceeds parameter dimension " << params.dim();
    throw DegreeError(os.str());
  }
  ComplexParamForm out{ParamForm(params, k), ParamForm(params, k)};
  const auto& indices = out.re.indices();
  std::vector<Matrix> args;
  for (std::size_t node = 0; node < params.size(); ++node) {
    const NcSlice& s = f.slice(node);
    for (std::size_t ji = 0; ji < indices.size(); ++ji) {
      args.clear();
      for (int j : indices[ji]) args.push_back(s.fields[j]);
      const Complex c = (s.rho * omega(args)).trace();
      out.re.at(ji, node) = c.real();
      out.im.at(ji, node) = c.imag();
    }
  }
  return out;
}

ResidualReport nc_naturality_residual(const NcNonpureMap& f, const NcForm& omega) {
  const ComplexParamForm lhs = nc_pullback(f, ce_differential(omega));
  const ComplexParamForm base = nc_pullback(f, omega);
  const ParamForm rhs_re = d_param(base.re);
  const ParamForm rhs_im = d_param(base.im);
  return over_interior(f, [&](std::size_t node) {
    double r = 0.0;
    for (std::size_t i = 0; i < rhs_re.indices().size(); ++i) {
      const Complex d(lhs.re.at(i, node) - rhs_re.at(i, node),
                      lhs.im.at(i, node) - rhs_im.at(i, node));
      r = std::max(r, std::abs(d));
    }
    return r;
  });
}

NcStokesResult nc_stokes_residual(const NcNonpureMap& f, const NcForm& omega) {
  if (omega.degree() != f.param_dim() - 1) {
    throw DegreeError("nc_stokes_residual: form degree must be one below the parameter dimension");
  }
  const ComplexParamForm top = nc_pullback(f, ce_differential(omega));
  const ComplexParamForm edge = nc_pullback(f, omega);
  NcStokesResult r;
  r.lhs = Complex(integrate_box(top.re), integrate_box(top.im));
  r.rhs = Complex(integrate_boundary(edge.re), integrate_boundary(edge.im));
  r.diff = std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace nonpure
