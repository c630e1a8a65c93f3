#include "nonpure/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "nonpure/error.hpp"

namespace nonpure {

namespace {

/// Slices of a lazily generated map, kept alive while nodes within `reach`
/// of the current node (in flat order) may still be requested.
class SliceWindow {
 public:
  SliceWindow(const NonpureMap& f, std::size_t reach) : f_(f), reach_(reach) {}

  const MapSlice& at(std::size_t node) {
    auto it = cache_.find(node);
    if (it == cache_.end()) it = cache_.emplace(node, f_.slice(node)).first;
    return it->second;
  }

  void advance(std::size_t node) {
    if (node < reach_) return;
    cache_.erase(cache_.begin(), cache_.lower_bound(node - reach_));
  }

 private:
  const NonpureMap& f_;
  std::size_t reach_;
  std::map<std::size_t, MapSlice> cache_;
};

void require_axis(const NonpureMap& f, int axis) {
  if (axis < 0 || axis >= f.param_dim()) {
    std::ostringstream os;
    os << "parameter axis " << axis << " out of range for m = " << f.param_dim();
    throw ShapeMismatch(os.str());
  }
}

/// (b - a) / (2 du), componentwise.
GridVectorField centered(const GridVectorField& plus, const GridVectorField& minus, double du) {
  return (0.5 / du) * (plus - minus);
}

GridVectorField curvature(SliceWindow& window, const ParamBox& params, std::size_t node, int i,
                          int j) {
  const std::size_t si = params.stride(i);
  const std::size_t sj = params.stride(j);
  const GridVectorField dvi_duj =
      centered(window.at(node + sj).fields[i], window.at(node - sj).fields[i], params.h(j));
  const GridVectorField dvj_dui =
      centered(window.at(node + si).fields[j], window.at(node - si).fields[j], params.h(i));
  const MapSlice& here = window.at(node);
  return dvi_duj - dvj_dui - lie_bracket(here.fields[i], here.fields[j]);
}

}  // namespace

ResidualReport continuity_residual(const NonpureMap& f, int axis) {
  require_axis(f, axis);
  const ParamBox& params = f.params();
  const BoxGrid& space = f.space();
  const std::size_t s = params.stride(axis);
  const double du = params.h(axis);
  SliceWindow window(f, s);
  ResidualAccumulator acc(&params, &space);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params.interior(k)) continue;
    window.advance(k);
    const MapSlice& here = window.at(k);
    const auto plus = window.at(k + s).rho.values();
    const auto minus = window.at(k - s).rho.values();
    const GridScalar flux_div = divergence(here.rho.scalar() * here.fields[axis]);
    for (std::size_t p = 0; p < space.size(); ++p) {
      acc.add((plus[p] - minus[p]) * (0.5 / du) + flux_div[p], k, p);
    }
  }
  return acc.finish();
}

ResidualReport compatibility_residual(const NonpureMap& f, int i, int j) {
  require_axis(f, i);
  require_axis(f, j);
  if (i == j) throw ShapeMismatch("compatibility_residual: axes must differ");
  const ParamBox& params = f.params();
  const BoxGrid& space = f.space();
  SliceWindow window(f, std::max(params.stride(i), params.stride(j)));
  ResidualAccumulator acc(&params, &space);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params.interior(k)) continue;
    window.advance(k);
    const GridVectorField c = curvature(window, params, k, i, j);
    for (std::size_t p = 0; p < space.size(); ++p) {
      double r = 0.0;
      for (int a = 0; a < c.dim(); ++a) r = std::max(r, std::abs(c.value(a, p)));
      acc.add(r, k, p);
    }
  }
  return acc.finish();
}

ResidualReport compatibility_residual(const NonpureMap& f) {
  const int m = f.param_dim();
  if (m == 1) {
    ResidualReport zero;
    zero.h_used = f.space().min_spacing();
    zero.du_used = f.params().min_spacing();
    return zero;
  }
  ResidualReport worst;
  bool first = true;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      ResidualReport r = compatibility_residual(f, i, j);
      if (first || r.max_abs > worst.max_abs) worst = r;
      first = false;
    }
  }
  return worst;
}

ResidualReport divergence_identity_residual(const GridScalar& f, const GridVectorField& v,
                                            const GridVectorField& w) {
  const BoxGrid& g = f.grid();
  if (v.grid() != g || w.grid() != g) {
    throw ShapeMismatch("divergence_identity_residual: grids differ");
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (f[k] != 0.0 && g.face_distance(k) < GridDensity::kMarginLayers) {
      throw SupportOverflow("divergence_identity_residual: f must vanish on the two-layer margin");
    }
  }
  const GridScalar lhs =
      divergence(divergence(f * w) * v) - divergence(divergence(f * v) * w);
  const GridScalar rhs = divergence(f * lie_bracket(v, w));
  ResidualAccumulator acc(nullptr, &g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.face_distance(k) < GridDensity::kMarginLayers) continue;
    acc.add(lhs[k] - rhs[k], 0, k);
  }
  return acc.finish();
}

ResidualReport mixed_theorem_residual(const NonpureMap& f, int i, int j, double continuity_tol) {
  require_axis(f, i);
  require_axis(f, j);
  if (i == j) throw ShapeMismatch("mixed_theorem_residual: axes must differ");
  for (int axis : {i, j}) {
    const ResidualReport c = continuity_residual(f, axis);
    if (!(c.max_abs <= continuity_tol)) {
      std::ostringstream os;
      os.precision(6);
      os << "mixed_theorem_residual: continuity residual " << c.max_abs << " on axis " << axis
         << " exceeds " << continuity_tol;
      throw PreconditionViolated(os.str(), c.max_abs);
    }
  }
  const ParamBox& params = f.params();
  const BoxGrid& space = f.space();
  SliceWindow window(f, std::max(params.stride(i), params.stride(j)));
  ResidualAccumulator acc(&params, &space);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params.interior(k)) continue;
    window.advance(k);
    const GridVectorField c = curvature(window, params, k, i, j);
    const GridScalar r = divergence(window.at(k).rho.scalar() * c);
    for (std::size_t p = 0; p < space.size(); ++p) acc.add(r[p], k, p);
  }
  return acc.finish();
}

}  // namespace nonpure
