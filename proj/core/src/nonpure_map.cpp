#include "nonpure/nonpure_map.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "nonpure/error.hpp"

namespace nonpure {

// ---------------------------------------------------------------------------
// ParamBox

namespace {

void require_param_dim(const BoxGrid& g) {
  if (g.dim() < 1 || g.dim() > 3) throw InvariantViolation("ParamBox: m must be 1, 2 or 3");
}

}  // namespace

ParamBox::ParamBox(std::vector<double> lo, std::vector<double> hi, std::vector<int> shape)
    : BoxGrid(std::move(lo), std::move(hi), std::move(shape)) {
  require_param_dim(*this);
}

ParamBox::ParamBox(BoxGrid grid) : BoxGrid(std::move(grid)) { require_param_dim(*this); }

ParamBox ParamBox::with_spacing(std::vector<double> lo, std::vector<double> hi, double du) {
  return ParamBox(BoxGrid::with_spacing(std::move(lo), std::move(hi), du));
}

// ---------------------------------------------------------------------------
// NonpureMap

NonpureMap::NonpureMap(ParamBox params, BoxGrid space, SliceSource source)
    : params_(std::move(params)), space_(std::move(space)), source_(std::move(source)) {
  if (!source_) throw InvariantViolation("NonpureMap: empty slice source");
}

NonpureMap NonpureMap::from_slices(ParamBox params, BoxGrid space,
                                   std::vector<MapSlice> slices) {
  if (slices.size() != params.size()) {
    throw ShapeMismatch("NonpureMap: slice count does not match parameter nodes");
  }
  auto stored = std::make_shared<const std::vector<MapSlice>>(std::move(slices));
  NonpureMap out(std::move(params), std::move(space),
                 [stored](std::size_t node) { return (*stored)[node]; });
  // Validate once up front; stored slices never change afterwards.
  for (std::size_t k = 0; k < out.params_.size(); ++k) out.slice(k);
  return out;
}

MapSlice NonpureMap::slice(std::size_t node) const {
  if (node >= params_.size()) throw ShapeMismatch("NonpureMap: parameter node out of range");
  MapSlice s = source_(node);
  if (s.rho.grid() != space_) throw ShapeMismatch("NonpureMap: density slice on wrong grid");
  if (static_cast<int>(s.fields.size()) != params_.dim()) {
    throw ShapeMismatch("NonpureMap: expected one field per parameter axis");
  }
  for (const auto& v : s.fields) {
    if (v.grid() != space_) throw ShapeMismatch("NonpureMap: field slice on wrong grid");
  }
  return s;
}

NonpureMap NonpureMap::materialize() const {
  std::vector<MapSlice> slices;
  slices.reserve(params_.size());
  for (std::size_t k = 0; k < params_.size(); ++k) slices.push_back(slice(k));
  return from_slices(params_, space_, std::move(slices));
}

// ---------------------------------------------------------------------------
// Families

ParamPath affine_path(const Eigen::MatrixXd& a) {
  ParamPath path;
  path.position = [a](std::span<const double> u, std::span<double> x) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) s += a(r, c) * u[c];
      x[r] = s;
    }
  };
  path.partial = [a](std::span<const double>, int j, std::span<double> dx) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) dx[r] = a(r, j);
  };
  return path;
}

namespace {

/// Samples sigma(p - shift) using per-axis squared offsets, so the cost per
/// node is a handful of additions.
std::vector<double> sample_translate(const BoxGrid& space, const Bump& sigma,
                                     std::span<const double> shift) {
  const int n = space.dim();
  std::array<std::vector<double>, kMaxDim> d2;
  for (int a = 0; a < n; ++a) {
    d2[a].resize(space.shape(a));
    for (int i = 0; i < space.shape(a); ++i) {
      const double d = (space.coord(a, i) - shift[a] - sigma.center[a]) / sigma.radius;
      d2[a][i] = d * d;
    }
  }
  std::vector<double> out(space.size(), 0.0);
  // The last axis is contiguous; walk the outer axes like an odometer.
  std::array<int, kMaxDim> idx{};
  const int last = n - 1;
  const int inner = space.shape(last);
  for (std::size_t k = 0; k < space.size(); k += inner) {
    double outer = 0.0;
    for (int a = 0; a < last; ++a) outer += d2[a][idx[a]];
    if (outer < 1.0) {
      for (int i = 0; i < inner; ++i) {
        const double r2 = outer + d2[last][i];
        if (r2 < 1.0) out[k + i] = sigma.scale * bump_profile(r2, sigma.sharpness);
      }
    }
    for (int a = last - 1; a >= 0; --a) {
      if (++idx[a] < space.shape(a)) break;
      idx[a] = 0;
    }
  }
  return out;
}

void check_path_supports(const ParamPath& x, const BoxGrid& space, const ParamBox& params,
                         std::span<const double> center, double radius) {
  const int n = space.dim();
  std::vector<double> u(params.dim()), shift(n), c(n);
  for (std::size_t k = 0; k < params.size(); ++k) {
    params.point(k, u);
    x.position(u, shift);
    for (int a = 0; a < n; ++a) c[a] = center[a] + shift[a];
    require_margin(space, c, radius);
  }
}

std::vector<GridVectorField> path_fields(const ParamPath& x, const BoxGrid& space,
                                         std::span<const double> u, int m) {
  std::vector<GridVectorField> fields;
  std::vector<double> dx(space.dim());
  for (int j = 0; j < m; ++j) {
    x.partial(u, j, dx);
    fields.push_back(constant_field(space, dx));
  }
  return fields;
}

/// Smallest radius of a ball about the bump center that contains its support
/// on the sampling grid; used for support checks of interpolated densities.
double grid_support_radius(const GridDensity& sigma, std::vector<double>& center) {
  const BoxGrid& g = sigma.grid();
  const int n = g.dim();
  // Mass-weighted center.
  center.assign(n, 0.0);
  std::vector<double> p(n);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (sigma[k] == 0.0) continue;
    g.point(k, p);
    const double w = g.trapezoid_weight(k) * sigma[k];
    for (int a = 0; a < n; ++a) center[a] += w * p[a];
  }
  double r = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (sigma[k] == 0.0) continue;
    g.point(k, p);
    double d2 = 0.0;
    for (int a = 0; a < n; ++a) d2 += (p[a] - center[a]) * (p[a] - center[a]);
    r = std::max(r, std::sqrt(d2));
  }
  // Interpolation spreads support by up to one cell diagonal.
  double diag = 0.0;
  for (int a = 0; a < n; ++a) diag += g.h(a) * g.h(a);
  return r + std::sqrt(diag);
}

}  // namespace

NonpureMap make_translation_family(ParamPath x, const Bump& sigma, ParamBox params,
                                   BoxGrid space) {
  if (static_cast<int>(sigma.center.size()) != space.dim()) {
    throw ShapeMismatch("make_translation_family: bump dimension does not match space");
  }
  check_path_supports(x, space, params, sigma.center, sigma.radius);
  const int m = params.dim();
  auto source = [x, sigma, params, space, m](std::size_t node) {
    std::vector<double> u = params.point(node);
    std::vector<double> shift(space.dim());
    x.position(u, shift);
    std::vector<double> values = sample_translate(space, sigma, shift);
    const double mass = integrate(GridScalar(space, values));
    for (double& v : values) v /= mass;
    return MapSlice{GridDensity(GridScalar(space, std::move(values))),
                    path_fields(x, space, u, m)};
  };
  return NonpureMap(std::move(params), std::move(space), std::move(source));
}

NonpureMap make_translation_family(ParamPath x, const GridDensity& sigma, ParamBox params) {
  const BoxGrid space = sigma.grid();
  std::vector<double> center;
  const double radius = grid_support_radius(sigma, center);
  check_path_supports(x, space, params, center, radius);
  const int m = params.dim();
  auto source = [x, sigma, params, space, m](std::size_t node) {
    std::vector<double> u = params.point(node);
    std::vector<double> shift(space.dim()), p(space.dim());
    x.position(u, shift);
    std::vector<double> values(space.size());
    for (std::size_t k = 0; k < space.size(); ++k) {
      space.point(k, p);
      for (int a = 0; a < space.dim(); ++a) p[a] -= shift[a];
      values[k] = interpolate(sigma.scalar(), p);
    }
    return MapSlice{GridDensity(GridScalar(space, std::move(values))),
                    path_fields(x, space, u, m)};
  };
  return NonpureMap(std::move(params), space, std::move(source));
}

namespace {

void check_affine_shape(const Eigen::MatrixXd& a, const BoxGrid& space, const ParamBox& params) {
  if (a.rows() != space.dim() || a.cols() != params.dim()) {
    throw ShapeMismatch("make_affine_family: A must be n x m");
  }
}

}  // namespace

NonpureMap make_affine_family(const Eigen::MatrixXd& a, const Bump& sigma, ParamBox params,
                              BoxGrid space) {
  check_affine_shape(a, space, params);
  return make_translation_family(affine_path(a), sigma, std::move(params), std::move(space));
}

NonpureMap make_affine_family(const Eigen::MatrixXd& a, const GridDensity& sigma,
                              ParamBox params) {
  check_affine_shape(a, sigma.grid(), params);
  return make_translation_family(affine_path(a), sigma, std::move(params));
}

NonpureMap make_stream_perturbed_family(ParamPath x, const Bump& sigma, ParamBox params,
                                        BoxGrid space, const StreamPerturbation& pert) {
  if (space.dim() != 2) throw ShapeMismatch("stream perturbation needs a planar space");
  if (pert.field < 0 || pert.field >= params.dim() || pert.modulated_axis < 0 ||
      pert.modulated_axis >= params.dim()) {
    throw ShapeMismatch("stream perturbation: axis out of range");
  }
  if (!(pert.radius > 0 && pert.radius < sigma.radius)) {
    throw InvariantViolation("stream perturbation must sit strictly inside the density support");
  }
  const NonpureMap base = make_translation_family(x, sigma, params, space);
  const Bump psi_shape{sigma.center, pert.radius, pert.amplitude, pert.sharpness};
  auto source = [base, x, psi_shape, pert, space, params](std::size_t node) {
    MapSlice s = base.slice(node);
    const std::vector<double> u = params.point(node);
    std::vector<double> shift(2), p(2);
    x.position(u, shift);
    const double modulation = 1.0 + u[pert.modulated_axis];
    const double max_rho = max_abs(s.rho.scalar());
    const double cutoff = 1e-3 * max_rho;

    const GridVectorField& v = s.fields[pert.field];
    std::vector<double> vx(v.component(0).values().begin(), v.component(0).values().end());
    std::vector<double> vy(v.component(1).values().begin(), v.component(1).values().end());
    const double r2_scale = 1.0 / (psi_shape.radius * psi_shape.radius);
    for (std::size_t k = 0; k < space.size(); ++k) {
      space.point(k, p);
      const double dx = p[0] - shift[0] - psi_shape.center[0];
      const double dy = p[1] - shift[1] - psi_shape.center[1];
      const double s2 = (dx * dx + dy * dy) * r2_scale;
      if (s2 >= 1.0) continue;
      const double rho = s.rho[k];
      if (rho < cutoff) {
        throw InvariantViolation("stream perturbation reaches the region rho < 1e-3 max rho");
      }
      // d/dq_a of b(q) = b(q) * (-a/(1-s)^2) * 2 q_a / R^2
      const double b = psi_shape.scale * modulation * bump_profile(s2, psi_shape.sharpness);
      const double g = -b * psi_shape.sharpness * 2.0 * r2_scale / ((1.0 - s2) * (1.0 - s2));
      const double psi_x = g * dx;
      const double psi_y = g * dy;
      vx[k] += psi_y / rho;
      vy[k] -= psi_x / rho;
    }
    std::vector<GridScalar> comps;
    comps.emplace_back(space, std::move(vx));
    comps.emplace_back(space, std::move(vy));
    s.fields[pert.field] = GridVectorField(std::move(comps));
    return s;
  };
  // Surface any cutoff violation at construction rather than on first use.
  NonpureMap out(params, space, source);
  for (std::size_t k = 0; k < params.size(); k += std::max<std::size_t>(1, params.size() / 7)) {
    out.slice(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reparameterization

namespace {

double det_small(std::span<const double> j, int m) {
  if (m == 1) return j[0];
  if (m == 2) return j[0] * j[3] - j[1] * j[2];
  return j[0] * (j[4] * j[8] - j[5] * j[7]) - j[1] * (j[3] * j[8] - j[5] * j[6]) +
         j[2] * (j[3] * j[7] - j[4] * j[6]);
}

struct Corner {
  std::size_t node;
  double weight;
};

std::vector<Corner> locate(const ParamBox& box, std::span<const double> u) {
  const int m = box.dim();
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int a = 0; a < m; ++a) {
    const double t = (u[a] - box.lo(a)) / box.h(a);
    const double slack = 1e-9;
    if (t < -slack || t > box.shape(a) - 1 + slack) {
      std::ostringstream os;
      os << "reparameterize: chart leaves the parameter box on axis " << a;
      throw InvariantViolation(os.str());
    }
    double tc = std::clamp(t, 0.0, static_cast<double>(box.shape(a) - 1));
    // Snap to nodes so that charts hitting nodes reproduce slices exactly.
    if (std::abs(tc - std::round(tc)) < 1e-10) tc = std::round(tc);
    int i = std::min(static_cast<int>(std::floor(tc)), box.shape(a) - 2);
    base[a] = i;
    frac[a] = tc - i;
  }
  std::vector<Corner> corners;
  for (int c = 0; c < (1 << m); ++c) {
    double w = 1.0;
    Index idx{};
    for (int a = 0; a < m; ++a) {
      const int bit = (c >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      idx[a] = base[a] + bit;
    }
    if (w != 0.0) corners.push_back({box.flat(idx), w});
  }
  return corners;
}

}  // namespace

NonpureMap reparameterize(const NonpureMap& f, ParamBox new_params, Chart phi) {
  const int m = f.param_dim();
  if (new_params.dim() != m) throw ShapeMismatch("reparameterize: parameter dimension differs");
  std::vector<double> v(m), u(m), jac(m * m);
  for (std::size_t k = 0; k < new_params.size(); ++k) {
    new_params.point(k, v);
    phi.jacobian(v, jac);
    if (std::abs(det_small(jac, m)) < 1e-12) {
      throw SingularJacobian("reparameterize: Jacobian is singular at a parameter node");
    }
    phi.map(v, u);
    locate(f.params(), u);
  }
  const BoxGrid space = f.space();
  auto source = [f, new_params, phi, m, space](std::size_t node) {
    std::vector<double> vv = new_params.point(node), uu(m), jj(m * m);
    phi.map(vv, uu);
    phi.jacobian(vv, jj);
    const std::vector<Corner> corners = locate(f.params(), uu);

    std::vector<double> rho(space.size(), 0.0);
    std::vector<std::vector<std::vector<double>>> vj(
        m, std::vector<std::vector<double>>(space.dim(), std::vector<double>(space.size(), 0.0)));
    for (const Corner& c : corners) {
      const MapSlice s = f.slice(c.node);
      for (std::size_t p = 0; p < space.size(); ++p) rho[p] += c.weight * s.rho[p];
      for (int j = 0; j < m; ++j) {
        for (int a = 0; a < space.dim(); ++a) {
          const auto comp = s.fields[j].component(a).values();
          for (std::size_t p = 0; p < space.size(); ++p) vj[j][a][p] += c.weight * comp[p];
        }
      }
    }
    std::vector<GridVectorField> fields;
    for (int i = 0; i < m; ++i) {
      std::vector<GridScalar> comps;
      for (int a = 0; a < space.dim(); ++a) {
        std::vector<double> b(space.size(), 0.0);
        for (int j = 0; j < m; ++j) {
          const double coeff = jj[j * m + i];
          if (coeff == 0.0) continue;
          for (std::size_t p = 0; p < space.size(); ++p) b[p] += coeff * vj[j][a][p];
        }
        comps.emplace_back(space, std::move(b));
      }
      fields.emplace_back(std::move(comps));
    }
    return MapSlice{GridDensity(GridScalar(space, std::move(rho))), std::move(fields)};
  };
  return NonpureMap(std::move(new_params), space, std::move(source));
}

}  // namespace nonpure
