#include "nonpure/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "nonpure/error.hpp"

namespace nonpure {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvariantViolation("DiscreteMeasure: no atoms");
  const std::size_t n = atoms_.front().position.size();
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (a.position.size() != n) throw InvariantViolation("DiscreteMeasure: mixed dimensions");
    if (!(a.weight > 0.0)) throw InvariantViolation("DiscreteMeasure: weights must be positive");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "DiscreteMeasure: weights sum to " << total;
    throw InvariantViolation(os.str());
  }
}

// ---------------------------------------------------------------------------
// Closed form on a line

namespace {

std::vector<double> cumulative(const GridDensity& rho) {
  const double h = rho.grid().h(0);
  std::vector<double> cdf(rho.values().size(), 0.0);
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * h * (rho[i - 1] + rho[i]);
  }
  return cdf;
}

}  // namespace

double w1_1d(const GridDensity& mu, const GridDensity& nu) {
  if (mu.grid().dim() != 1) throw ShapeMismatch("w1_1d: densities must be one-dimensional");
  if (mu.grid() != nu.grid()) throw ShapeMismatch("w1_1d: densities on different grids");
  const std::vector<double> a = cumulative(mu);
  const std::vector<double> b = cumulative(nu);
  const double h = mu.grid().h(0);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = (i == 0 || i + 1 == a.size()) ? 0.5 * h : h;
    s += w * std::abs(a[i] - b[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Transportation simplex

namespace {

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw InvariantViolation("w1_lp: non-finite input");
  int exp = 0;
  const double mant = std::frexp(x, &exp);
  // mant * 2^53 is an integer for every finite double.
  const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  Rational r(scaled);
  const int shift = exp - 53;
  const Rational two_pow =
      Rational(boost::multiprecision::cpp_int(1) << (shift >= 0 ? shift : -shift));
  if (shift >= 0) return Rational(r * two_pow);
  return Rational(r / two_pow);
}

Rational ground_cost(const DiscreteMeasure::Atom& a, const DiscreteMeasure::Atom& b) {
  if (a.position.size() == 1) return abs(to_rational(a.position[0]) - to_rational(b.position[0]));
  double s = 0.0;
  for (std::size_t i = 0; i < a.position.size(); ++i) {
    const double d = a.position[i] - b.position[i];
    s += d * d;
  }
  return to_rational(std::sqrt(s));
}

std::vector<Rational> exact_weights(const DiscreteMeasure& m) {
  std::vector<Rational> w;
  Rational total = 0;
  for (const auto& a : m.atoms()) {
    w.push_back(to_rational(a.weight));
    total += w.back();
  }
  for (Rational& x : w) x /= total;
  return w;
}

struct Transport {
  std::size_t rows, cols;
  std::vector<Rational> cost;  // row-major
  std::vector<Rational> flow;
  std::vector<bool> basic;

  std::size_t cell(std::size_t i, std::size_t j) const { return i * cols + j; }
};

/// Northwest-corner start: a monotone staircase of rows + cols - 1 basic
/// cells, some possibly carrying zero flow.
void northwest_corner(Transport& t, std::vector<Rational> supply, std::vector<Rational> demand) {
  std::size_t i = 0, j = 0;
  while (true) {
    const Rational x = supply[i] < demand[j] ? Rational(supply[i]) : Rational(demand[j]);
    t.flow[t.cell(i, j)] = x;
    t.basic[t.cell(i, j)] = true;
    supply[i] -= x;
    demand[j] -= x;
    if (i + 1 == t.rows && j + 1 == t.cols) break;
    if ((supply[i] == 0 && i + 1 < t.rows) || j + 1 == t.cols) {
      ++i;
    } else {
      ++j;
    }
  }
}

/// Dual potentials with u_0 = 0 from u_i + v_j = c_ij on the basis tree.
void potentials(const Transport& t, std::vector<Rational>& u, std::vector<Rational>& v) {
  std::vector<bool> row_done(t.rows, false), col_done(t.cols, false);
  u.assign(t.rows, 0);
  v.assign(t.cols, 0);
  row_done[0] = true;
  std::size_t assigned = 1;
  while (assigned < t.rows + t.cols) {
    bool progress = false;
    for (std::size_t i = 0; i < t.rows; ++i) {
      for (std::size_t j = 0; j < t.cols; ++j) {
        const std::size_t c = t.cell(i, j);
        if (!t.basic[c] || row_done[i] == col_done[j]) continue;
        if (row_done[i]) {
          v[j] = t.cost[c] - u[i];
          col_done[j] = true;
        } else {
          u[i] = t.cost[c] - v[j];
          row_done[i] = true;
        }
        ++assigned;
        progress = true;
      }
    }
    if (!progress) throw InvariantViolation("w1_lp: basis is not a spanning tree");
  }
}

/// Cells on the tree path from column `col` to row `row` (nodes: rows are
/// 0..rows-1, columns rows..rows+cols-1), in path order.
std::vector<std::size_t> tree_path(const Transport& t, std::size_t row, std::size_t col) {
  const std::size_t nodes = t.rows + t.cols;
  std::vector<std::optional<std::size_t>> parent(nodes);
  std::vector<std::size_t> via(nodes, 0);
  std::vector<std::size_t> queue{t.rows + col};
  parent[t.rows + col] = t.rows + col;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const std::size_t node = queue[q];
    if (node == row) break;
    auto visit = [&](std::size_t next, std::size_t c) {
      if (!parent[next]) {
        parent[next] = node;
        via[next] = c;
        queue.push_back(next);
      }
    };
    if (node < t.rows) {
      for (std::size_t j = 0; j < t.cols; ++j) {
        if (t.basic[t.cell(node, j)]) visit(t.rows + j, t.cell(node, j));
      }
    } else {
      const std::size_t j = node - t.rows;
      for (std::size_t i = 0; i < t.rows; ++i) {
        if (t.basic[t.cell(i, j)]) visit(i, t.cell(i, j));
      }
    }
  }
  if (!parent[row]) throw InvariantViolation("w1_lp: basis is disconnected");
  std::vector<std::size_t> path;
  for (std::size_t node = row; node != t.rows + col; node = *parent[node]) {
    path.push_back(via[node]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

Rational solve_transport(Transport& t, const std::vector<Rational>& supply,
                         const std::vector<Rational>& demand) {
  t.flow.assign(t.rows * t.cols, 0);
  t.basic.assign(t.rows * t.cols, false);
  northwest_corner(t, supply, demand);
  std::vector<Rational> u, v;
  while (true) {
    potentials(t, u, v);
    // Bland: first cell with negative reduced cost enters.
    std::optional<std::size_t> enter;
    for (std::size_t i = 0; i < t.rows && !enter; ++i) {
      for (std::size_t j = 0; j < t.cols; ++j) {
        const std::size_t c = t.cell(i, j);
        if (!t.basic[c] && t.cost[c] - u[i] - v[j] < 0) {
          enter = c;
          break;
        }
      }
    }
    if (!enter) break;
    const std::size_t ei = *enter / t.cols, ej = *enter % t.cols;
    const std::vector<std::size_t> path = tree_path(t, ei, ej);
    // Path cells alternate -, +, -, ... starting from the entering column.
    std::optional<std::size_t> leave;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const std::size_t c = path[p];
      if (!leave || t.flow[c] < t.flow[*leave] || (t.flow[c] == t.flow[*leave] && c < *leave)) {
        leave = c;
      }
    }
    const Rational theta = t.flow[*leave];
    for (std::size_t p = 0; p < path.size(); ++p) {
      if (p % 2 == 0) {
        t.flow[path[p]] -= theta;
      } else {
        t.flow[path[p]] += theta;
      }
    }
    t.flow[*enter] = theta;
    t.basic[*enter] = true;
    t.basic[*leave] = false;
  }
  Rational total = 0;
  for (std::size_t c = 0; c < t.flow.size(); ++c) {
    if (t.basic[c]) total += t.flow[c] * t.cost[c];
  }
  return total;
}

}  // namespace

Rational w1_lp_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.size() > kMaxLpAtoms || nu.size() > kMaxLpAtoms) {
    std::ostringstream os;
    os << "w1_lp: " << mu.size() << " x " << nu.size() << " atoms exceeds the cap of "
       << kMaxLpAtoms;
    throw SizeOverflow(os.str());
  }
  if (mu.dim() != nu.dim()) throw ShapeMismatch("w1_lp: measures in different dimensions");
  Transport t{mu.size(), nu.size(), {}, {}, {}};
  t.cost.reserve(t.rows * t.cols);
  for (const auto& a : mu.atoms()) {
    for (const auto& b : nu.atoms()) t.cost.push_back(ground_cost(a, b));
  }
  return solve_transport(t, exact_weights(mu), exact_weights(nu));
}

double w1_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return static_cast<double>(w1_lp_exact(mu, nu));
}

DiscreteMeasure discretize(const GridDensity& rho, int bins) {
  const BoxGrid& g = rho.grid();
  if (g.dim() != 1) throw ShapeMismatch("discretize: density must be one-dimensional");
  const int intervals = g.shape(0) - 1;
  if (bins < 1 || intervals % bins != 0) {
    std::ostringstream os;
    os << "discretize: " << intervals << " intervals do not split into " << bins << " bins";
    throw ShapeMismatch(os.str());
  }
  const int per_bin = intervals / bins;
  const double h = g.h(0);
  std::vector<DiscreteMeasure::Atom> atoms;
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    double w = 0.0;
    for (int i = b * per_bin; i < (b + 1) * per_bin; ++i) w += 0.5 * h * (rho[i] + rho[i + 1]);
    if (w <= 0.0) continue;
    const double center = g.lo(0) + (b + 0.5) * per_bin * h;
    atoms.push_back({{center}, w});
    total += w;
  }
  // Trapezoidal mass is one only up to the density tolerance.
  for (auto& a : atoms) a.weight /= total;
  return DiscreteMeasure(std::move(atoms));
}

// ---------------------------------------------------------------------------
// Curves

Curve1D::Curve1D(std::vector<double> times, std::vector<GridDensity> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
  if (times_.size() != slices_.size() || times_.empty()) {
    throw ShapeMismatch("Curve1D: times and slices differ in length");
  }
  for (std::size_t i = 0; i < slices_.size(); ++i) {
    if (slices_[i].grid().dim() != 1 || slices_[i].grid() != slices_.front().grid()) {
      throw ShapeMismatch("Curve1D: slices must share one 1-D grid");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw InvariantViolation("Curve1D: times must increase");
    }
  }
}

double metric_derivative(const Curve1D& curve, std::size_t t_index) {
  if (t_index == 0 || t_index + 1 >= curve.size()) {
    std::ostringstream os;
    os << "metric_derivative: time index " << t_index << " has no centered stencil";
    throw BoundaryIndex(os.str());
  }
  const auto& t = curve.times();
  const auto& s = curve.slices();
  return w1_1d(s[t_index + 1], s[t_index - 1]) / (t[t_index + 1] - t[t_index - 1]);
}

}  // namespace nonpure
