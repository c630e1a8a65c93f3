#include "nonpure/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nonpure/error.hpp"

namespace nonpure {

namespace {

void require_same_grid(const BoxGrid& a, const BoxGrid& b, const char* what) {
  if (a != b) throw ShapeMismatch(std::string(what) + ": grids differ");
}

}  // namespace

// ---------------------------------------------------------------------------
// BoxGrid

BoxGrid::BoxGrid(std::vector<double> lo, std::vector<double> hi,
                 std::vector<int> shape) {
  if (lo.empty() || lo.size() > kMaxDim || lo.size() != hi.size() ||
      lo.size() != shape.size()) {
    throw InvariantViolation("BoxGrid: corners and shape must share a dimension in 1..3");
  }
  dim_ = static_cast<int>(lo.size());
  for (int a = 0; a < dim_; ++a) {
    if (!(lo[a] < hi[a])) {
      std::ostringstream os;
      os << "BoxGrid: lo >= hi on axis " << a;
      throw InvariantViolation(os.str());
    }
    if (shape[a] < kMinNodes) {
      std::ostringstream os;
      os << "BoxGrid: axis " << a << " has " << shape[a] << " nodes, need at least "
         << kMinNodes;
      throw InvariantViolation(os.str());
    }
    lo_[a] = lo[a];
    hi_[a] = hi[a];
    shape_[a] = shape[a];
    h_[a] = (hi[a] - lo[a]) / (shape[a] - 1);
  }
  size_ = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    stride_[a] = size_;
    size_ *= static_cast<std::size_t>(shape_[a]);
  }
}

BoxGrid BoxGrid::with_spacing(std::vector<double> lo, std::vector<double> hi,
                              double h) {
  if (!(h > 0)) throw InvariantViolation("BoxGrid::with_spacing: h must be positive");
  std::vector<int> shape(lo.size());
  for (std::size_t a = 0; a < lo.size(); ++a) {
    shape[a] = static_cast<int>(std::lround((hi[a] - lo[a]) / h)) + 1;
  }
  return BoxGrid(std::move(lo), std::move(hi), std::move(shape));
}

std::vector<double> BoxGrid::lo_vec() const { return {lo_.begin(), lo_.begin() + dim_}; }
std::vector<double> BoxGrid::hi_vec() const { return {hi_.begin(), hi_.begin() + dim_}; }
std::vector<int> BoxGrid::shape_vec() const {
  return {shape_.begin(), shape_.begin() + dim_};
}

std::size_t BoxGrid::flat(const Index& idx) const {
  std::size_t k = 0;
  for (int a = 0; a < dim_; ++a) k += stride_[a] * static_cast<std::size_t>(idx[a]);
  return k;
}

Index BoxGrid::unflat(std::size_t k) const {
  Index idx{};
  for (int a = 0; a < dim_; ++a) idx[a] = axis_index(k, a);
  return idx;
}

void BoxGrid::point(std::size_t k, std::span<double> out) const {
  for (int a = 0; a < dim_; ++a) out[a] = coord(a, axis_index(k, a));
}

std::vector<double> BoxGrid::point(std::size_t k) const {
  std::vector<double> p(dim_);
  point(k, p);
  return p;
}

double BoxGrid::min_spacing() const {
  return *std::min_element(h_.begin(), h_.begin() + dim_);
}

double BoxGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= h_[a];
  return v;
}

double BoxGrid::trapezoid_weight(std::size_t k) const {
  double w = 1.0;
  for (int a = 0; a < dim_; ++a) {
    const int i = axis_index(k, a);
    w *= (i == 0 || i == shape_[a] - 1) ? 0.5 * h_[a] : h_[a];
  }
  return w;
}

int BoxGrid::face_distance(std::size_t k) const {
  int d = shape_[0];
  for (int a = 0; a < dim_; ++a) {
    const int i = axis_index(k, a);
    d = std::min({d, i, shape_[a] - 1 - i});
  }
  return d;
}

bool BoxGrid::operator==(const BoxGrid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (lo_[a] != other.lo_[a] || hi_[a] != other.hi_[a] || shape_[a] != other.shape_[a]) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Fields

GridScalar::GridScalar(BoxGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ShapeMismatch("GridScalar: value count does not match grid size");
  }
}

GridScalar::GridScalar(BoxGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

GridDensity::GridDensity(GridScalar values) : values_(std::move(values)) {
  const BoxGrid& g = values_.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double v = values_[k];
    if (!(v >= 0.0)) throw InvariantViolation("GridDensity: negative or non-finite value");
    if (v != 0.0 && g.face_distance(k) < kMarginLayers) {
      throw SupportOverflow("GridDensity: support reaches the two-layer margin");
    }
  }
  const double mass = integrate(values_);
  if (std::abs(mass - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "GridDensity: mass " << mass << " differs from 1";
    throw InvariantViolation(os.str());
  }
}

GridVectorField::GridVectorField(std::vector<GridScalar> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ShapeMismatch("GridVectorField: no components");
  const BoxGrid& g = components_.front().grid();
  if (static_cast<int>(components_.size()) != g.dim()) {
    throw ShapeMismatch("GridVectorField: component count must equal grid dimension");
  }
  for (const auto& c : components_) require_same_grid(g, c.grid(), "GridVectorField");
}

GridVectorField::GridVectorField(const BoxGrid& grid) {
  components_.reserve(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) components_.emplace_back(grid);
}

GridScalar sample(const BoxGrid& grid, const PointFn& f) {
  std::vector<double> out(grid.size());
  std::array<double, kMaxDim> p{};
  std::span<double> ps(p.data(), grid.dim());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid.point(k, ps);
    out[k] = f(ps);
  }
  return GridScalar(grid, std::move(out));
}

GridVectorField sample_field(const BoxGrid& grid, const VectorPointFn& f) {
  const int n = grid.dim();
  std::vector<std::vector<double>> comps(n, std::vector<double>(grid.size()));
  std::array<double, kMaxDim> p{};
  std::array<double, kMaxDim> v{};
  std::span<double> ps(p.data(), n);
  std::span<double> vs(v.data(), n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid.point(k, ps);
    f(ps, vs);
    for (int a = 0; a < n; ++a) comps[a][k] = v[a];
  }
  std::vector<GridScalar> out;
  for (int a = 0; a < n; ++a) out.emplace_back(grid, std::move(comps[a]));
  return GridVectorField(std::move(out));
}

GridVectorField constant_field(const BoxGrid& grid, std::span<const double> c) {
  if (static_cast<int>(c.size()) != grid.dim()) {
    throw ShapeMismatch("constant_field: vector length must equal grid dimension");
  }
  std::vector<GridScalar> out;
  for (int a = 0; a < grid.dim(); ++a) {
    out.emplace_back(grid, std::vector<double>(grid.size(), c[a]));
  }
  return GridVectorField(std::move(out));
}

namespace {

template <class Op>
GridScalar zip(const GridScalar& a, const GridScalar& b, Op op) {
  require_same_grid(a.grid(), b.grid(), "pointwise op");
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = op(a[k], b[k]);
  return GridScalar(a.grid(), std::move(out));
}

template <class Op>
GridVectorField zip_field(const GridVectorField& a, const GridVectorField& b, Op op) {
  if (a.dim() != b.dim()) throw ShapeMismatch("pointwise op: field dimensions differ");
  std::vector<GridScalar> out;
  for (int i = 0; i < a.dim(); ++i) out.push_back(zip(a.component(i), b.component(i), op));
  return GridVectorField(std::move(out));
}

}  // namespace

GridScalar operator+(const GridScalar& a, const GridScalar& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
GridScalar operator-(const GridScalar& a, const GridScalar& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
GridScalar operator*(const GridScalar& a, const GridScalar& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
GridScalar operator*(double s, const GridScalar& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& x : out) x *= s;
  return GridScalar(a.grid(), std::move(out));
}
GridVectorField operator+(const GridVectorField& a, const GridVectorField& b) {
  return zip_field(a, b, [](double x, double y) { return x + y; });
}
GridVectorField operator-(const GridVectorField& a, const GridVectorField& b) {
  return zip_field(a, b, [](double x, double y) { return x - y; });
}
GridVectorField operator*(double s, const GridVectorField& a) {
  std::vector<GridScalar> out;
  for (int i = 0; i < a.dim(); ++i) out.push_back(s * a.component(i));
  return GridVectorField(std::move(out));
}
GridVectorField operator*(const GridScalar& f, const GridVectorField& v) {
  std::vector<GridScalar> out;
  for (int i = 0; i < v.dim(); ++i) out.push_back(f * v.component(i));
  return GridVectorField(std::move(out));
}

double max_abs(const GridScalar& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const GridVectorField& v) {
  double m = 0.0;
  for (int i = 0; i < v.dim(); ++i) m = std::max(m, max_abs(v.component(i)));
  return m;
}

// ---------------------------------------------------------------------------
// Difference operators

GridScalar partial(const GridScalar& f, int axis) {
  const BoxGrid& g = f.grid();
  if (axis < 0 || axis >= g.dim()) throw ShapeMismatch("partial: axis out of range");
  const std::size_t s = g.stride(axis);
  const int n = g.shape(axis);
  const double inv2h = 0.5 / g.h(axis);
  const auto v = f.values();
  std::vector<double> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const int i = g.axis_index(k, axis);
    if (i == 0) {
      out[k] = (-3.0 * v[k] + 4.0 * v[k + s] - v[k + 2 * s]) * inv2h;
    } else if (i == n - 1) {
      out[k] = (3.0 * v[k] - 4.0 * v[k - s] + v[k - 2 * s]) * inv2h;
    } else {
      out[k] = (v[k + s] - v[k - s]) * inv2h;
    }
  }
  return GridScalar(g, std::move(out));
}

GridScalar divergence(const GridVectorField& w) {
  GridScalar acc = partial(w.component(0), 0);
  for (int a = 1; a < w.dim(); ++a) acc = acc + partial(w.component(a), a);
  return acc;
}

GridVectorField gradient(const GridScalar& f) {
  std::vector<GridScalar> out;
  for (int a = 0; a < f.grid().dim(); ++a) out.push_back(partial(f, a));
  return GridVectorField(std::move(out));
}

GridScalar directional(const GridScalar& f, const GridVectorField& v) {
  require_same_grid(f.grid(), v.grid(), "directional");
  GridScalar acc = v.component(0) * partial(f, 0);
  for (int a = 1; a < v.dim(); ++a) acc = acc + v.component(a) * partial(f, a);
  return acc;
}

GridVectorField lie_bracket(const GridVectorField& v, const GridVectorField& w) {
  require_same_grid(v.grid(), w.grid(), "lie_bracket");
  std::vector<GridScalar> out;
  for (int k = 0; k < v.dim(); ++k) {
    out.push_back(directional(w.component(k), v) - directional(v.component(k), w));
  }
  return GridVectorField(std::move(out));
}

double integrate(const GridScalar& f) {
  const BoxGrid& g = f.grid();
  double sum = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (f[k] != 0.0) sum += g.trapezoid_weight(k) * f[k];
  }
  return sum;
}

double interpolate(const GridScalar& f, std::span<const double> p) {
  const BoxGrid& g = f.grid();
  const int n = g.dim();
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int a = 0; a < n; ++a) {
    const double t = (p[a] - g.lo(a)) / g.h(a);
    if (t < 0.0 || t > g.shape(a) - 1) return 0.0;
    int i = static_cast<int>(std::floor(t));
    i = std::min(i, g.shape(a) - 2);
    base[a] = i;
    frac[a] = t - i;
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    std::size_t k = 0;
    for (int a = 0; a < n; ++a) {
      const int bit = (corner >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      k += g.stride(a) * static_cast<std::size_t>(base[a] + bit);
    }
    if (w != 0.0) acc += w * f[k];
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Bumps

double bump_profile(double r_squared, double sharpness) {
  if (r_squared >= 1.0) return 0.0;
  return std::exp(-sharpness * r_squared / (1.0 - r_squared));
}

double Bump::operator()(std::span<const double> p) const {
  double r2 = 0.0;
  for (std::size_t a = 0; a < center.size(); ++a) {
    const double d = (p[a] - center[a]) / radius;
    r2 += d * d;
  }
  return scale * bump_profile(r2, sharpness);
}

double Bump::shifted(std::span<const double> p, std::span<const double> shift) const {
  double r2 = 0.0;
  for (std::size_t a = 0; a < center.size(); ++a) {
    const double d = (p[a] - shift[a] - center[a]) / radius;
    r2 += d * d;
  }
  return scale * bump_profile(r2, sharpness);
}

void require_margin(const BoxGrid& grid, std::span<const double> center, double radius) {
  if (static_cast<int>(center.size()) != grid.dim()) {
    throw ShapeMismatch("bump center dimension does not match grid");
  }
  for (int a = 0; a < grid.dim(); ++a) {
    const double margin = GridDensity::kMarginLayers * grid.h(a);
    if (center[a] - radius < grid.lo(a) + margin || center[a] + radius > grid.hi(a) - margin) {
      std::ostringstream os;
      os << "support of radius " << radius << " around axis-" << a << " coordinate "
         << center[a] << " leaves the two-layer margin";
      throw SupportOverflow(os.str());
    }
  }
}

Bump Bump::normalized_on(const BoxGrid& grid, std::vector<double> center, double radius,
                         double sharpness) {
  if (!(radius > 0)) throw InvariantViolation("bump radius must be positive");
  if (!(sharpness > 0)) throw InvariantViolation("bump sharpness must be positive");
  require_margin(grid, center, radius);
  Bump b{std::move(center), radius, 1.0, sharpness};
  const double mass = integrate(sample(grid, [&](std::span<const double> p) { return b(p); }));
  if (!(mass > 0)) throw InvariantViolation("bump unresolved by grid: zero mass");
  b.scale = 1.0 / mass;
  return b;
}

GridDensity make_bump(const BoxGrid& grid, std::vector<double> center, double radius,
                      double sharpness) {
  const Bump b = Bump::normalized_on(grid, std::move(center), radius, sharpness);
  return GridDensity(sample(grid, [&](std::span<const double> p) { return b(p); }));
}

}  // namespace nonpure
