#include "nonpure/transport.hpp"

#include <cmath>
#include <sstream>

#include "nonpure/error.hpp"

namespace nonpure {

namespace {

void check_support(const BoxGrid& g, const std::vector<double>& rho, double threshold,
                   double t) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.face_distance(k) == GridDensity::kMarginLayers && rho[k] > threshold) {
      std::ostringstream os;
      os << "transport_evolve: density " << rho[k] << " at the margin at t = " << t;
      throw SupportOverflow(os.str());
    }
  }
}

}  // namespace

std::vector<GridDensity> transport_evolve(const GridDensity& rho0, const VelocityFn& velocity,
                                          const std::vector<double>& t_grid,
                                          const TransportOptions& options) {
  if (t_grid.empty()) throw InvariantViolation("transport_evolve: empty time grid");
  const BoxGrid& g = rho0.grid();
  const int n = g.dim();
  std::vector<GridDensity> out;
  out.reserve(t_grid.size());
  out.push_back(rho0);
  std::vector<double> rho(rho0.values().begin(), rho0.values().end());
  std::vector<double> next(rho.size());
  check_support(g, rho, options.overflow_threshold, t_grid.front());

  for (std::size_t step = 1; step < t_grid.size(); ++step) {
    const double t = t_grid[step - 1];
    const double dt = t_grid[step] - t;
    if (!(dt > 0.0)) throw InvariantViolation("transport_evolve: time grid must increase");
    const GridVectorField v = velocity(t);
    if (v.grid() != g || v.dim() != n) throw ShapeMismatch("transport_evolve: velocity grid");
    const double vmax = max_abs(v);
    if (vmax * dt > 0.5 * g.min_spacing()) {
      std::ostringstream os;
      os << "transport_evolve: max|V| dt = " << vmax * dt << " exceeds 0.5 min h = "
         << 0.5 * g.min_spacing();
      throw CflViolation(os.str());
    }

    next = rho;
    for (int a = 0; a < n; ++a) {
      const std::size_t s = g.stride(a);
      const double ratio = dt / g.h(a);
      const GridScalar& va = v.component(a);
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.axis_index(k, a) + 1 >= g.shape(a)) continue;
        const std::size_t kr = k + s;
        if (g.face_distance(k) < GridDensity::kMarginLayers ||
            g.face_distance(kr) < GridDensity::kMarginLayers) {
          continue;
        }
        const double face_v = 0.5 * (va[k] + va[kr]);
        const double flux = face_v > 0.0 ? face_v * rho[k] : face_v * rho[kr];
        next[k] -= ratio * flux;
        next[kr] += ratio * flux;
      }
    }
    for (std::size_t k = 0; k < next.size(); ++k) {
      if (next[k] < 0.0) {
        std::ostringstream os;
        os << "transport_evolve: negative density " << next[k] << " at t = " << t_grid[step];
        throw InvariantViolation(os.str());
      }
    }
    rho.swap(next);
    check_support(g, rho, options.overflow_threshold, t_grid[step]);
    out.emplace_back(GridScalar(g, rho));
  }
  return out;
}

}  // namespace nonpure
