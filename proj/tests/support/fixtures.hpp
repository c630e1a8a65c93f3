// Fixture families shared by unit tests and the acceptance suite. Each one
// takes the space spacing h and a parameter box so that refinement studies
// can sweep both. Bumps use sharpness 6, whose edge derivatives are mild
// enough for second-order behaviour to show from h = R / 16 on.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "nonpure/nonpure_map.hpp"

namespace nonpure::testing {

inline constexpr double kSharpness = 6.0;

/// Square patch of `nodes` nodes per axis with spacing du centered at `center`.
inline ParamBox param_patch(std::vector<double> center, double du, int nodes = 5) {
  std::vector<double> lo, hi;
  const double half = 0.5 * (nodes - 1) * du;
  for (double c : center) {
    lo.push_back(c - half);
    hi.push_back(c + half);
  }
  return ParamBox(lo, hi, std::vector<int>(center.size(), nodes));
}

/// n = 2, m = 1, A = (1, 0)^t, u in [0, 1] on `intervals` steps, bump of
/// radius 0.8 at the origin.
inline NonpureMap example_affine(double h, int intervals) {
  const BoxGrid space = BoxGrid::with_spacing({-1.2, -1.2}, {2.2, 1.2}, h);
  const ParamBox params({0.0}, {1.0}, {intervals + 1});
  Eigen::MatrixXd a(2, 1);
  a << 1.0, 0.0;
  const Bump sigma = Bump::normalized_on(space, {0.0, 0.0}, 0.8, kSharpness);
  return make_affine_family(a, sigma, params, space);
}

/// Curved planar path X(u, v) = (u + 0.3 v^2, v - 0.2 u v) over [0, 1]^2.
inline ParamPath planar_path() {
  ParamPath x;
  x.position = [](std::span<const double> u, std::span<double> out) {
    out[0] = u[0] + 0.3 * u[1] * u[1];
    out[1] = u[1] - 0.2 * u[0] * u[1];
  };
  x.partial = [](std::span<const double> u, int j, std::span<double> dx) {
    if (j == 0) {
      dx[0] = 1.0;
      dx[1] = -0.2 * u[1];
    } else {
      dx[0] = 0.6 * u[1];
      dx[1] = 1.0 - 0.2 * u[0];
    }
  };
  return x;
}

inline BoxGrid planar_space(double h) {
  return BoxGrid::with_spacing({-1.2, -1.2}, {2.6, 2.2}, h);
}

inline NonpureMap planar_translation(double h, ParamBox params, double radius = 0.8) {
  const BoxGrid space = planar_space(h);
  return make_translation_family(
      planar_path(), Bump::normalized_on(space, {0.0, 0.0}, radius, kSharpness), params, space);
}

inline NonpureMap planar_stream_perturbed(double h, ParamBox params) {
  const BoxGrid space = planar_space(h);
  StreamPerturbation pert;
  pert.radius = 0.5;
  pert.amplitude = 0.05;
  pert.sharpness = kSharpness;
  return make_stream_perturbed_family(
      planar_path(), Bump::normalized_on(space, {0.0, 0.0}, 0.8, kSharpness), params, space, pert);
}

/// Paraboloid X(u, v) = (u, v, u^2 + v^2) over [0, 1]^2.
inline ParamPath paraboloid_path() {
  ParamPath x;
  x.position = [](std::span<const double> u, std::span<double> out) {
    out[0] = u[0];
    out[1] = u[1];
    out[2] = u[0] * u[0] + u[1] * u[1];
  };
  x.partial = [](std::span<const double> u, int j, std::span<double> dx) {
    dx[0] = j == 0 ? 1.0 : 0.0;
    dx[1] = j == 1 ? 1.0 : 0.0;
    dx[2] = 2.0 * u[j];
  };
  return x;
}

inline BoxGrid surface_space(double h, double radius) {
  const double pad = radius + 3.0 * h;
  return BoxGrid::with_spacing({-pad, -pad, -pad}, {1.0 + pad, 1.0 + pad, 2.0 + pad}, h);
}

inline NonpureMap surface_translation(double h, ParamBox params, double radius) {
  const BoxGrid space = surface_space(h, radius);
  return make_translation_family(
      paraboloid_path(), Bump::normalized_on(space, {0.0, 0.0, 0.0}, radius, kSharpness), params,
      space);
}

}  // namespace nonpure::testing
