#include "nonpure_cli/fixtures.hpp"

#include <cmath>
#include <random>

#include "nonpure/error.hpp"
#include "nonpure_cli/scenario.hpp"

namespace nonpure::cli {

namespace {

const Complex kI(0.0, 1.0);

ParamPath planar_path() {
  ParamPath x;
  x.position = [](std::span<const double> u, std::span<double> out) {
    out[0] = u[0] + 0.3 * u[1] * u[1];
    out[1] = u[1] - 0.2 * u[0] * u[1];
  };
  x.partial = [](std::span<const double> u, int j, std::span<double> dx) {
    dx[0] = j == 0 ? 1.0 : 0.6 * u[1];
    dx[1] = j == 0 ? -0.2 * u[1] : 1.0 - 0.2 * u[0];
  };
  return x;
}

ParamPath paraboloid_path() {
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

ParamBox family_params(const FamilyConfig& config, int m) {
  if (!config.patch) return unit_param_box(m, config.du);
  std::vector<double> center = config.patch_center;
  if (center.empty()) center.assign(m, 0.5);
  if (static_cast<int>(center.size()) != m) {
    throw ConstructorError("patch.center needs " + std::to_string(m) + " coordinates");
  }
  std::vector<double> lo, hi;
  const double half = 0.5 * (config.patch_nodes - 1) * config.du;
  for (double c : center) {
    lo.push_back(c - half);
    hi.push_back(c + half);
  }
  return ParamBox(lo, hi, std::vector<int>(m, config.patch_nodes));
}

/// Box holding every translate of the ball when u ranges over [0, 1]^m,
/// with room for the two-layer margin.
BoxGrid family_space(const std::string& fixture, double h, double radius) {
  const double pad = radius + 3.0 * h;
  if (fixture == "affine") return BoxGrid::with_spacing({-pad, -pad}, {1.0 + pad, pad}, h);
  if (fixture == "surface") {
    return BoxGrid::with_spacing({-pad, -pad, -pad}, {1.0 + pad, 1.0 + pad, 2.0 + pad}, h);
  }
  return BoxGrid::with_spacing({-pad, -pad}, {1.3 + pad, 1.0 + pad}, h);
}

Matrix pauli(int which) {
  Matrix s(2, 2);
  if (which == 0) s << 0, 1, 1, 0;
  if (which == 1) s << 0, -kI, kI, 0;
  if (which == 2) s << 1, 0, 0, -1;
  return s;
}

Matrix random_matrix(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = Complex(d(rng), d(rng));
  }
  return a;
}

}  // namespace

int family_param_dim(const std::string& fixture) { return fixture == "affine" ? 1 : 2; }

int family_space_dim(const std::string& fixture) { return fixture == "surface" ? 3 : 2; }

ParamBox unit_param_box(int m, double du) {
  const int intervals = std::max(3, static_cast<int>(std::lround(1.0 / du)));
  return ParamBox(std::vector<double>(m, 0.0), std::vector<double>(m, 1.0),
                  std::vector<int>(m, intervals + 1));
}

NonpureMap build_family(const FamilyConfig& config) {
  try {
    const int m = family_param_dim(config.fixture);
    ParamBox params = family_params(config, m);
    const BoxGrid space = family_space(config.fixture, config.h, config.radius);
    const Bump sigma = Bump::normalized_on(space, std::vector<double>(space.dim(), 0.0),
                                           config.radius, config.sharpness);
    if (config.fixture == "affine") {
      Eigen::MatrixXd a(2, 1);
      a << 1.0, 0.0;
      return make_affine_family(a, sigma, std::move(params), space);
    }
    if (config.fixture == "planar-translation") {
      return make_translation_family(planar_path(), sigma, std::move(params), space);
    }
    if (config.fixture == "planar-stream") {
      StreamPerturbation pert;
      pert.radius = 0.625 * config.radius;
      pert.amplitude = 0.05;
      pert.sharpness = config.sharpness;
      return make_stream_perturbed_family(planar_path(), sigma, std::move(params), space, pert);
    }
    if (config.fixture == "surface") {
      return make_translation_family(paraboloid_path(), sigma, std::move(params), space);
    }
  } catch (const Error& e) {
    throw ConstructorError("fixture '" + config.fixture + "': " + e.what());
  }
  throw ConstructorError("unknown fixture '" + config.fixture + "'");
}

SpaceForm stokes_form(int n) {
  // Each coefficient carries analytic partials two levels deep.
  auto fn = [](auto f) { return PointFn(f); };
  if (n == 2) {
    // P = x^2 y - y^3 / 2, Q = x y^2 + x^3
    ScalarFunction p{fn([](std::span<const double> x) { return x[0] * x[0] * x[1] - 0.5 * x[1] * x[1] * x[1]; }),
                     {{fn([](std::span<const double> x) { return 2.0 * x[0] * x[1]; }), {}},
                      {fn([](std::span<const double> x) { return x[0] * x[0] - 1.5 * x[1] * x[1]; }), {}}}};
    ScalarFunction q{fn([](std::span<const double> x) { return x[0] * x[1] * x[1] + x[0] * x[0] * x[0]; }),
                     {{fn([](std::span<const double> x) { return x[1] * x[1] + 3.0 * x[0] * x[0]; }), {}},
                      {fn([](std::span<const double> x) { return 2.0 * x[0] * x[1]; }), {}}}};
    return SpaceForm(2, 1, {p, q});
  }
  if (n == 3) {
    ScalarFunction f1{fn([](std::span<const double> x) { return -x[1] * x[2]; }),
                      {{fn([](std::span<const double>) { return 0.0; }), {}},
                       {fn([](std::span<const double> x) { return -x[2]; }), {}},
                       {fn([](std::span<const double> x) { return -x[1]; }), {}}}};
    ScalarFunction f2{fn([](std::span<const double> x) { return x[0] * x[2] + x[0] * x[1] * x[1]; }),
                      {{fn([](std::span<const double> x) { return x[2] + x[1] * x[1]; }), {}},
                       {fn([](std::span<const double> x) { return 2.0 * x[0] * x[1]; }), {}},
                       {fn([](std::span<const double> x) { return x[0]; }), {}}}};
    ScalarFunction f3{fn([](std::span<const double> x) { return x[0] * x[1] + x[0] * x[0]; }),
                      {{fn([](std::span<const double> x) { return x[1] + 2.0 * x[0]; }), {}},
                       {fn([](std::span<const double> x) { return x[0]; }), {}},
                       {fn([](std::span<const double>) { return 0.0; }), {}}}};
    return SpaceForm(3, 1, {f1, f2, f3});
  }
  throw ConstructorError("no Stokes form in dimension " + std::to_string(n));
}

NcFixture build_nc_fixture(const std::string& generators, int n, int m, std::uint64_t seed) {
  try {
    if (generators == "pauli") {
      if (n != 2) throw ConstructorError("pauli generators need n = 2");
      NcFixture f{{}, DensityMatrix(Matrix((Matrix::Identity(2, 2) + 0.4 * pauli(2) + 0.3 * pauli(0)) / 2.0)),
                  pauli(2) + 0.5 * pauli(0)};
      const double scale[] = {1.0, 0.7, 0.5};
      for (int j = 0; j < m; ++j) f.generators.push_back(scale[j] * kI * pauli(j));
      return f;
    }
    if (generators == "random") {
      std::mt19937_64 rng(seed);
      std::vector<Matrix> gens;
      for (int j = 0; j < m; ++j) {
        const Matrix a = random_matrix(n, rng);
        gens.push_back(Matrix(0.5 * kI * (a + a.adjoint())));
      }
      const Matrix b = random_matrix(n, rng);
      Matrix r = b * b.adjoint();
      r /= trace(r).real();
      const Matrix c = random_matrix(n, rng);
      return NcFixture{gens, DensityMatrix(Matrix(0.5 * (r + r.adjoint()))), c};
    }
  } catch (const Error& e) {
    throw ConstructorError(std::string("nc fixture: ") + e.what());
  }
  throw ConstructorError("unknown generators '" + generators + "'");
}

NcForm nc_stokes_form(const Matrix& c, int m) {
  switch (m) {
    case 1:
      return NcForm::constant(c, "C");
    case 2:
      return NcForm(1, [c](const std::vector<Matrix>& x) { return commutator(c, x[0]); }, "[C,X]");
    case 3:
      return NcForm(2, [c](const std::vector<Matrix>& x) { return commutator(c, commutator(x[0], x[1])); },
                    "[C,[X,Y]]");
    default:
      throw ConstructorError("nc-stokes supports m in [1, 3]");
  }
}

}  // namespace nonpure::cli
