/// @file fixtures.hpp
/// @brief Named fixture families the runner can build from scenario keys.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nonpure/forms.hpp"
#include "nonpure/nc.hpp"
#include "nonpure/nonpure_map.hpp"

namespace nonpure::cli {

/// Commutative families:
///   affine              n = 2, m = 1, X(u) = (u, 0)
///   planar-translation  n = 2, m = 2, X(u, v) = (u + 0.3 v^2, v - 0.2 u v)
///   planar-stream       the same with a divergence-free stream perturbation
///   surface             n = 3, m = 2, X(u, v) = (u, v, u^2 + v^2)
struct FamilyConfig {
  std::string fixture = "affine";
  double h = 0.05;
  double du = 0.05;
  double radius = 0.8;
  double sharpness = 6.0;
  /// Patch of `patch_nodes` nodes per axis with spacing du around
  /// `patch_center` instead of the unit box.
  bool patch = false;
  int patch_nodes = 5;
  std::vector<double> patch_center;
};

inline const std::vector<std::string_view> kFamilyNames{"affine", "planar-translation",
                                                        "planar-stream", "surface"};

int family_param_dim(const std::string& fixture);
int family_space_dim(const std::string& fixture);

/// Throws ConstructorError when the family cannot be built.
NonpureMap build_family(const FamilyConfig& config);

/// Parameter box [0, 1]^m with about 1/du intervals per axis (at least 3).
ParamBox unit_param_box(int m, double du);

/// Polynomial 1-form used for Stokes checks in dimension n (2 or 3); in
/// three dimensions it is F.dx for F = (-yz, xz + xy^2, xy + x^2).
SpaceForm stokes_form(int n);

/// Matrix fixtures: Pauli-type skew-Hermitian generators for n = 2, seeded
/// random ones otherwise.
struct NcFixture {
  std::vector<Matrix> generators;
  DensityMatrix rho0;
  /// Coefficient matrix C of the form [C, .].
  Matrix c;
};

NcFixture build_nc_fixture(const std::string& generators, int n, int m, std::uint64_t seed);

/// Degree m - 1 form: C for m = 1, [C, X] for m = 2, [C, [X, Y]] for m = 3.
NcForm nc_stokes_form(const Matrix& c, int m);

}  // namespace nonpure::cli
