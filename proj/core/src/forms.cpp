#include "nonpure/forms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "nonpure/error.hpp"

namespace nonpure {

// ---------------------------------------------------------------------------
// Multi-indices

namespace {

void collect_indices(int n, int k, int start, MultiIndex& current,
                     std::vector<MultiIndex>& out) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(current);
    return;
  }
  for (int i = start; i < n; ++i) {
    current.push_back(i);
    collect_indices(n, k, i + 1, current, out);
    current.pop_back();
  }
}

/// Sorts `index` in place and returns the sign of the sorting permutation,
/// or 0 if an axis repeats.
int sort_with_sign(MultiIndex& index) {
  int sign = 1;
  for (std::size_t i = 0; i < index.size(); ++i) {
    for (std::size_t j = 0; j + 1 < index.size() - i; ++j) {
      if (index[j] > index[j + 1]) {
        std::swap(index[j], index[j + 1]);
        sign = -sign;
      }
    }
  }
  for (std::size_t i = 0; i + 1 < index.size(); ++i) {
    if (index[i] == index[i + 1]) return 0;
  }
  return sign;
}

MultiIndex without(const MultiIndex& index, std::size_t pos) {
  MultiIndex out;
  out.reserve(index.size() - 1);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i != pos) out.push_back(index[i]);
  }
  return out;
}

}  // namespace

std::vector<MultiIndex> increasing_multi_indices(int n, int k) {
  std::vector<MultiIndex> out;
  if (k < 0 || k > n) return out;
  MultiIndex current;
  collect_indices(n, k, 0, current, out);
  return out;
}

std::size_t multi_index_rank(int n, const MultiIndex& index) {
  const auto all = increasing_multi_indices(n, static_cast<int>(index.size()));
  const auto it = std::find(all.begin(), all.end(), index);
  if (it == all.end()) throw DegreeError("multi_index_rank: not an increasing multi-index");
  return static_cast<std::size_t>(it - all.begin());
}

// ---------------------------------------------------------------------------
// Space forms

ScalarFunction derivative(const ScalarFunction& f, int axis, int n, double h_d) {
  if (static_cast<int>(f.partials.size()) == n) return f.partials[axis];
  ScalarFunction out;
  out.value = [f, axis, n, h_d](std::span<const double> p) {
    std::array<double, kMaxDim> q{};
    std::copy_n(p.begin(), n, q.begin());
    q[axis] = p[axis] + h_d;
    const double plus = f.value(std::span<const double>(q.data(), n));
    q[axis] = p[axis] - h_d;
    const double minus = f.value(std::span<const double>(q.data(), n));
    return (plus - minus) / (2.0 * h_d);
  };
  return out;
}

namespace {

/// sum_t c_t f_t, with analytic partials whenever every term has them.
ScalarFunction combine(const std::vector<std::pair<double, ScalarFunction>>& terms, int n) {
  ScalarFunction out;
  out.value = [terms](std::span<const double> p) {
    double s = 0.0;
    for (const auto& [c, f] : terms) s += c * f.value(p);
    return s;
  };
  const bool analytic = std::all_of(terms.begin(), terms.end(), [n](const auto& t) {
    return static_cast<int>(t.second.partials.size()) == n;
  });
  if (analytic && !terms.empty()) {
    for (int b = 0; b < n; ++b) {
      std::vector<std::pair<double, ScalarFunction>> db;
      db.reserve(terms.size());
      for (const auto& [c, f] : terms) db.emplace_back(c, f.partials[b]);
      out.partials.push_back(combine(db, n));
    }
  }
  return out;
}

ScalarFunction zero_function() {
  ScalarFunction z;
  z.value = [](std::span<const double>) { return 0.0; };
  return z;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / i;
  return r;
}

}  // namespace

SpaceForm::SpaceForm(int n, int k, std::vector<ScalarFunction> coefficients, double h_d)
    : n_(n), k_(k), h_d_(h_d), coefficients_(std::move(coefficients)) {
  if (n < 1 || n > kMaxDim || k < 0 || k > n + 1) {
    std::ostringstream os;
    os << "SpaceForm: degree " << k << " not supported on R^" << n;
    throw DegreeError(os.str());
  }
  if (!(h_d > 0.0)) throw InvariantViolation("SpaceForm: difference step must be positive");
  indices_ = increasing_multi_indices(n, k);
  if (coefficients_.size() != indices_.size()) {
    std::ostringstream os;
    os << "SpaceForm: expected " << indices_.size() << " coefficients, got "
       << coefficients_.size();
    throw ShapeMismatch(os.str());
  }
  for (const auto& c : coefficients_) {
    if (!c.value) throw InvariantViolation("SpaceForm: empty coefficient function");
  }
}

SpaceForm SpaceForm::zero(int n, int k) {
  return SpaceForm(n, k, std::vector<ScalarFunction>(binomial(n, k), zero_function()));
}

namespace {

/// det of the k x k matrix M(r, c) = vectors[c][index[r]].
template <typename Vectors>
double minor_det(const MultiIndex& index, const Vectors& v) {
  switch (index.size()) {
    case 0:
      return 1.0;
    case 1:
      return v[0][index[0]];
    case 2: {
      const int a = index[0], b = index[1];
      return v[0][a] * v[1][b] - v[1][a] * v[0][b];
    }
    case 3: {
      const int a = index[0], b = index[1], c = index[2];
      return v[0][a] * (v[1][b] * v[2][c] - v[2][b] * v[1][c]) -
             v[1][a] * (v[0][b] * v[2][c] - v[2][b] * v[0][c]) +
             v[2][a] * (v[0][b] * v[1][c] - v[1][b] * v[0][c]);
    }
    default:
      throw DegreeError("minor_det: degree above 3");
  }
}

}  // namespace

double eval_space_form(const SpaceForm& omega, std::span<const double> p,
                       const std::vector<std::vector<double>>& vectors) {
  if (static_cast<int>(vectors.size()) != omega.degree()) {
    std::ostringstream os;
    os << "eval_space_form: " << vectors.size() << " vectors for a " << omega.degree()
       << "-form";
    throw DegreeError(os.str());
  }
  if (static_cast<int>(p.size()) != omega.dim()) {
    throw ShapeMismatch("eval_space_form: point dimension");
  }
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != omega.dim()) {
      throw ShapeMismatch("eval_space_form: vector dimension");
    }
  }
  // Evaluate on the lexicographically sorted arguments and restore the sign,
  // so that transposing two arguments negates the result bit for bit.
  std::vector<const double*> cols;
  for (const auto& v : vectors) cols.push_back(v.data());
  const int k = omega.degree();
  double sign = 1.0;
  for (int i = 1; i < k; ++i) {
    for (int j = i; j > 0; --j) {
      if (!std::lexicographical_compare(cols[j], cols[j] + omega.dim(), cols[j - 1],
                                        cols[j - 1] + omega.dim())) {
        break;
      }
      std::swap(cols[j], cols[j - 1]);
      sign = -sign;
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    s += omega.coefficient(i)(p) * minor_det(omega.indices()[i], cols);
  }
  return sign * s;
}

SpaceForm d_space(const SpaceForm& omega) {
  const int n = omega.dim();
  const int k = omega.degree();
  if (k > n) throw DegreeError("d_space: degree already above the dimension");
  std::vector<ScalarFunction> out;
  for (const MultiIndex& index : increasing_multi_indices(n, k + 1)) {
    std::vector<std::pair<double, ScalarFunction>> terms;
    for (std::size_t a = 0; a < index.size(); ++a) {
      const std::size_t src = multi_index_rank(n, without(index, a));
      const double sign = (a % 2 == 0) ? 1.0 : -1.0;
      terms.emplace_back(sign, derivative(omega.coefficient(src), index[a], n, omega.h_d()));
    }
    out.push_back(combine(terms, n));
  }
  return SpaceForm(n, k + 1, std::move(out), omega.h_d());
}

// ---------------------------------------------------------------------------
// Parameter forms

ParamForm::ParamForm(ParamBox params, int k) : params_(std::move(params)), k_(k) {
  if (k < 0 || k > params_.dim()) {
    std::ostringstream os;
    os << "ParamForm: degree " << k << " on a box of dimension " << params_.dim();
    throw DegreeError(os.str());
  }
  indices_ = increasing_multi_indices(params_.dim(), k);
  coefficients_.assign(indices_.size(), std::vector<double>(params_.size(), 0.0));
}

ParamForm::ParamForm(ParamBox params, int k, std::vector<std::vector<double>> coefficients)
    : ParamForm(std::move(params), k) {
  if (coefficients.size() != indices_.size()) {
    throw ShapeMismatch("ParamForm: coefficient count does not match C(m, k)");
  }
  for (const auto& c : coefficients) {
    if (c.size() != params_.size()) {
      throw ShapeMismatch("ParamForm: coefficient length does not match node count");
    }
  }
  coefficients_ = std::move(coefficients);
}

namespace {

double param_derivative(std::span<const double> c, const ParamBox& g, std::size_t k, int axis) {
  const std::size_t s = g.stride(axis);
  const int i = g.axis_index(k, axis);
  const int last = g.shape(axis) - 1;
  const double h = g.h(axis);
  if (i == 0) return (-3.0 * c[k] + 4.0 * c[k + s] - c[k + 2 * s]) / (2.0 * h);
  if (i == last) return (3.0 * c[k] - 4.0 * c[k - s] + c[k - 2 * s]) / (2.0 * h);
  return (c[k + s] - c[k - s]) / (2.0 * h);
}

}  // namespace

ParamForm d_param(const ParamForm& alpha) {
  const ParamBox& g = alpha.params();
  const int m = g.dim();
  const int k = alpha.degree();
  if (k >= m) throw DegreeError("d_param: degree must be below the parameter dimension");
  ParamForm out(g, k + 1);
  for (std::size_t i = 0; i < out.indices().size(); ++i) {
    const MultiIndex& index = out.indices()[i];
    for (std::size_t a = 0; a < index.size(); ++a) {
      const std::size_t src = multi_index_rank(m, without(index, a));
      const double sign = (a % 2 == 0) ? 1.0 : -1.0;
      const auto c = alpha.coefficients(src);
      for (std::size_t node = 0; node < g.size(); ++node) {
        out.at(i, node) += sign * param_derivative(c, g, node, index[a]);
      }
    }
  }
  return out;
}

ParamForm permute_axes(const ParamForm& alpha, const std::vector<int>& perm) {
  const ParamBox& g = alpha.params();
  const int m = g.dim();
  std::vector<int> check = perm;
  std::sort(check.begin(), check.end());
  std::vector<int> identity(m);
  std::iota(identity.begin(), identity.end(), 0);
  if (check != identity) throw ShapeMismatch("permute_axes: not a permutation of the axes");

  std::vector<double> lo(m), hi(m);
  std::vector<int> shape(m);
  for (int a = 0; a < m; ++a) {
    lo[a] = g.lo(perm[a]);
    hi[a] = g.hi(perm[a]);
    shape[a] = g.shape(perm[a]);
  }
  ParamForm out(ParamBox(lo, hi, shape), alpha.degree());
  const ParamBox& ng = out.params();
  for (std::size_t i = 0; i < out.indices().size(); ++i) {
    MultiIndex old_index;
    for (int a : out.indices()[i]) old_index.push_back(perm[a]);
    const int sign = sort_with_sign(old_index);
    const std::size_t src = multi_index_rank(m, old_index);
    for (std::size_t node = 0; node < ng.size(); ++node) {
      const Index nidx = ng.unflat(node);
      Index oidx{};
      for (int a = 0; a < m; ++a) oidx[perm[a]] = nidx[a];
      out.at(i, node) = sign * alpha.at(src, g.flat(oidx));
    }
  }
  return out;
}

int OrientedBoxFace::sign() const {
  const int hi_sign = (axis % 2 == 0) ? 1 : -1;
  return hi ? hi_sign : -hi_sign;
}

std::vector<OrientedBoxFace> box_faces(int m) {
  std::vector<OrientedBoxFace> faces;
  for (int a = 0; a < m; ++a) {
    faces.push_back({a, false});
    faces.push_back({a, true});
  }
  return faces;
}

double integrate_box(const ParamForm& alpha) {
  const ParamBox& g = alpha.params();
  if (alpha.degree() != g.dim()) {
    throw DegreeError("integrate_box: form degree must equal the box dimension");
  }
  const auto c = alpha.coefficients(0);
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += g.trapezoid_weight(k) * c[k];
  return s;
}

double integrate_boundary(const ParamForm& alpha) {
  const ParamBox& g = alpha.params();
  const int m = g.dim();
  if (alpha.degree() != m - 1) {
    throw DegreeError("integrate_boundary: form degree must be one below the box dimension");
  }
  double total = 0.0;
  for (const OrientedBoxFace& face : box_faces(m)) {
    MultiIndex rest;
    for (int a = 0; a < m; ++a) {
      if (a != face.axis) rest.push_back(a);
    }
    const auto c = alpha.coefficients(multi_index_rank(m, rest));
    const int target = face.hi ? g.shape(face.axis) - 1 : 0;
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (g.axis_index(k, face.axis) != target) continue;
      double w = 1.0;
      for (int b : rest) {
        const int i = g.axis_index(k, b);
        w *= (i == 0 || i == g.shape(b) - 1) ? 0.5 * g.h(b) : g.h(b);
      }
      s += w * c[k];
    }
    total += face.sign() * s;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Pullback

std::vector<ParamForm> pullback(const NonpureMap& f, const std::vector<SpaceForm>& forms) {
  const ParamBox& params = f.params();
  const BoxGrid& space = f.space();
  const int m = params.dim();
  const int n = space.dim();
  std::vector<ParamForm> out;
  std::vector<std::vector<MultiIndex>> param_indices;
  for (const SpaceForm& omega : forms) {
    if (omega.degree() > m) {
      std::ostringstream os;
      os << "pullback: degree " << omega.degree() << " exceeds parameter dimension " << m;
      throw DegreeError(os.str());
    }
    if (omega.dim() != n) throw ShapeMismatch("pullback: form dimension differs from space");
    out.emplace_back(params, omega.degree());
    param_indices.push_back(out.back().indices());
  }

  std::vector<double> p(n);
  std::vector<std::vector<double>> coeff(forms.size());
  std::array<std::array<double, kMaxDim>, kMaxDim> v{};
  std::array<const double*, kMaxDim> cols{};
  for (std::size_t node = 0; node < params.size(); ++node) {
    const MapSlice s = f.slice(node);
    for (std::size_t q = 0; q < space.size(); ++q) {
      const double rho = s.rho[q];
      if (rho == 0.0) continue;
      const double w = space.trapezoid_weight(q) * rho;
      space.point(q, p);
      for (int j = 0; j < m; ++j) {
        for (int a = 0; a < n; ++a) v[j][a] = s.fields[j].value(a, q);
      }
      for (std::size_t fi = 0; fi < forms.size(); ++fi) {
        const SpaceForm& omega = forms[fi];
        coeff[fi].resize(omega.size());
        for (std::size_t i = 0; i < omega.size(); ++i) coeff[fi][i] = omega.coefficient(i)(p);
        for (std::size_t ji = 0; ji < param_indices[fi].size(); ++ji) {
          const MultiIndex& jset = param_indices[fi][ji];
          for (std::size_t c = 0; c < jset.size(); ++c) cols[c] = v[jset[c]].data();
          double value = 0.0;
          for (std::size_t i = 0; i < omega.size(); ++i) {
            value += coeff[fi][i] * minor_det(omega.indices()[i], cols);
          }
          out[fi].at(ji, node) += w * value;
        }
      }
    }
  }
  return out;
}

ParamForm pullback(const NonpureMap& f, const SpaceForm& omega) {
  return std::move(pullback(f, std::vector<SpaceForm>{omega}).front());
}

ResidualReport naturality_residual(const NonpureMap& f, const SpaceForm& omega) {
  const auto pulled = pullback(f, std::vector<SpaceForm>{d_space(omega), omega});
  const ParamForm rhs = d_param(pulled[1]);
  const ParamBox& params = f.params();
  ResidualAccumulator acc(&params, nullptr);
  for (std::size_t node = 0; node < params.size(); ++node) {
    if (!params.interior(node)) continue;
    double r = 0.0;
    for (std::size_t i = 0; i < rhs.indices().size(); ++i) {
      r = std::max(r, std::abs(pulled[0].at(i, node) - rhs.at(i, node)));
    }
    acc.add(r, node, 0);
  }
  ResidualReport report = acc.finish();
  report.h_used = f.space().min_spacing();
  return report;
}

StokesResult stokes_residual(const NonpureMap& f, const SpaceForm& omega) {
  if (omega.degree() != f.param_dim() - 1) {
    throw DegreeError("stokes_residual: form degree must be one below the parameter dimension");
  }
  const auto pulled = pullback(f, std::vector<SpaceForm>{d_space(omega), omega});
  StokesResult r;
  r.lhs = integrate_box(pulled[0]);
  r.rhs = integrate_boundary(pulled[1]);
  r.diff = std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace nonpure
