#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nonpure/convergence.hpp"
#include "nonpure/error.hpp"
#include "nonpure/forms.hpp"
#include "support/fixtures.hpp"
#include "support/polynomial.hpp"

using namespace nonpure;
namespace tf = nonpure::testing;
using tf::Polynomial;

namespace {

Polynomial var(int n, int a) { return Polynomial::variable(n, a); }

SpaceForm poly_form(int n, int k, const std::vector<Polynomial>& c) {
  std::vector<ScalarFunction> f;
  for (const auto& p : c) f.push_back(p.scalar_function());
  return SpaceForm(n, k, f);
}

SpaceForm random_form(int n, int k, int degree, std::mt19937_64& rng, bool analytic = true) {
  std::vector<ScalarFunction> f;
  const auto count = increasing_multi_indices(n, k).size();
  for (std::size_t i = 0; i < count; ++i) {
    const Polynomial p = Polynomial::random(n, degree, rng);
    f.push_back(analytic ? p.scalar_function() : ScalarFunction{p.fn(), {}});
  }
  return SpaceForm(n, k, f);
}

std::vector<double> random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

/// Node values of a polynomial on a parameter box.
std::vector<double> nodal(const ParamBox& b, const Polynomial& p) {
  std::vector<double> out(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) out[k] = p(b.point(k));
  return out;
}

/// 1-form P dx + Q dy with P = x^2 y - 0.5 y^3, Q = x y^2 + x^3.
SpaceForm planar_one_form() {
  const Polynomial x = var(2, 0), y = var(2, 1);
  return poly_form(2, 1, {x * x * y - 0.5 * (y * y * y), x * y * y + x * x * x});
}

/// F = (-y z, x z + x y^2, x y + x^2) as a 1-form on R^3.
const std::vector<Polynomial>& surface_field() {
  static const std::vector<Polynomial> f = [] {
    const Polynomial x = var(3, 0), y = var(3, 1), z = var(3, 2);
    return std::vector<Polynomial>{(-1.0) * (y * z), x * z + x * y * y, x * y + x * x};
  }();
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation

TEST(SpaceForms, EvaluatesBasisForms) {
  const Polynomial one = Polynomial::constant(2, 1.0), zero = Polynomial::constant(2, 0.0);
  const SpaceForm dx = poly_form(2, 1, {one, zero});
  const std::vector<double> p{0.3, -0.2};
  EXPECT_EQ(eval_space_form(dx, p, {{2.5, -7.0}}), 2.5);

  const Polynomial one3 = Polynomial::constant(3, 1.0), zero3 = Polynomial::constant(3, 0.0);
  // Indices in order {0,1}, {0,2}, {1,2}.
  const SpaceForm dxdy = poly_form(3, 2, {one3, zero3, zero3});
  const std::vector<double> q{0.1, 0.2, 0.3};
  EXPECT_EQ(eval_space_form(dxdy, q, {{1, 0, 0}, {0, 1, 0}}), 1.0);
  EXPECT_EQ(eval_space_form(dxdy, q, {{0, 1, 0}, {1, 0, 0}}), -1.0);
}

TEST(SpaceForms, EvaluationIsAlternating) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    for (int k : {2, 3}) {
      const SpaceForm w = random_form(3, k, 2, rng);
      const auto p = random_vector(3, rng);
      std::vector<std::vector<double>> v;
      for (int i = 0; i < k; ++i) v.push_back(random_vector(3, rng));
      const double base = eval_space_form(w, p, v);
      for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
          auto s = v;
          std::swap(s[i], s[j]);
          EXPECT_EQ(eval_space_form(w, p, s), -base);
        }
      }
      // Repeated argument.
      auto r = v;
      r[1] = r[0];
      EXPECT_NEAR(eval_space_form(w, p, r), 0.0, 1e-14);
    }
  }
}

TEST(SpaceForms, RejectsWrongArity) {
  std::mt19937_64 rng(1);
  const SpaceForm w = random_form(3, 2, 1, rng);
  const std::vector<double> p{0, 0, 0};
  EXPECT_THROW(eval_space_form(w, p, {{1, 0, 0}}), DegreeError);
  EXPECT_THROW(SpaceForm(2, 1, {var(2, 0).scalar_function()}), ShapeMismatch);
}

// ---------------------------------------------------------------------------
// Exterior derivative on R^n

TEST(SpaceForms, DifferentialOfProduct) {
  const Polynomial x = var(2, 0), y = var(2, 1);
  const SpaceForm f = poly_form(2, 0, {x * y});
  const SpaceForm df = d_space(f);
  ASSERT_EQ(df.degree(), 1);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const auto p = random_vector(2, rng);
    EXPECT_EQ(df.coefficient(0)(p), p[1]);
    EXPECT_EQ(df.coefficient(1)(p), p[0]);
  }
}

TEST(SpaceForms, DifferentialOfXDy) {
  const SpaceForm w = poly_form(2, 1, {Polynomial::constant(2, 0.0), var(2, 0)});
  const SpaceForm dw = d_space(w);
  ASSERT_EQ(dw.degree(), 2);
  const std::vector<double> p{0.7, -1.3};
  EXPECT_EQ(dw.coefficient(0)(p), 1.0);
  EXPECT_EQ(eval_space_form(dw, p, {{1, 0}, {0, 1}}), 1.0);
}

TEST(SpaceForms, DifferentialSquaredVanishes) {
  std::mt19937_64 rng(2024);
  for (int k : {0, 1}) {
    const SpaceForm analytic = random_form(3, k, 4, rng, true);
    const SpaceForm numeric = random_form(3, k, 4, rng, false);
    const SpaceForm dda = d_space(d_space(analytic));
    const SpaceForm ddn = d_space(d_space(numeric));
    const double hd = numeric.h_d();
    for (int t = 0; t < 20; ++t) {
      const auto p = random_vector(3, rng);
      std::vector<std::vector<double>> v;
      for (int i = 0; i < k + 2; ++i) v.push_back(random_vector(3, rng));
      EXPECT_LE(std::abs(eval_space_form(dda, p, v)), 1e-9);
      EXPECT_LE(std::abs(eval_space_form(ddn, p, v)), 1e2 * hd * hd);
    }
  }
}

TEST(SpaceForms, DegreeAboveDimensionIsRejected) {
  const SpaceForm top = poly_form(2, 2, {var(2, 0)});
  const SpaceForm beyond = d_space(top);
  EXPECT_EQ(beyond.degree(), 3);
  EXPECT_EQ(beyond.size(), 0u);
  EXPECT_THROW(d_space(beyond), DegreeError);
}

// ---------------------------------------------------------------------------
// Parameter forms

TEST(ParamForms, BoxIntegralAndOrientation) {
  const ParamBox b({0.0, 0.0}, {2.0, 3.0}, {5, 7});
  ParamForm alpha(b, 2, {std::vector<double>(b.size(), 1.0)});
  EXPECT_NEAR(integrate_box(alpha), 6.0, 1e-14);
  EXPECT_NEAR(integrate_box(permute_axes(alpha, {1, 0})), -6.0, 1e-14);
  EXPECT_THROW(integrate_boundary(alpha), DegreeError);
}

TEST(ParamForms, GreensTheoremOnTheUnitSquare) {
  const ParamBox b({0.0, 0.0}, {1.0, 1.0}, {11, 11});
  const Polynomial u1 = var(2, 0);
  // u1 du2: coefficient of du1 is 0, of du2 is u1.
  const ParamForm alpha(b, 1, {std::vector<double>(b.size(), 0.0), nodal(b, u1)});
  EXPECT_NEAR(integrate_boundary(alpha), 1.0, 1e-14);
  EXPECT_NEAR(integrate_box(d_param(alpha)), 1.0, 1e-14);
}

TEST(ParamForms, OrientedFaces) {
  const auto faces = box_faces(2);
  ASSERT_EQ(faces.size(), 4u);
  // Counterclockwise boundary of the unit square.
  EXPECT_EQ((OrientedBoxFace{0, true}.sign()), 1);
  EXPECT_EQ((OrientedBoxFace{0, false}.sign()), -1);
  EXPECT_EQ((OrientedBoxFace{1, true}.sign()), -1);
  EXPECT_EQ((OrientedBoxFace{1, false}.sign()), 1);
  int total = 0;
  for (const auto& f : box_faces(3)) total += f.sign();
  EXPECT_EQ(total, 0);
}

TEST(ParamForms, DifferentialSignConvention) {
  const ParamBox b({0.0, 0.0}, {1.0, 1.0}, {6, 6});
  const ParamForm constant(b, 1, {std::vector<double>(b.size(), 2.0), std::vector<double>(b.size(), -1.0)});
  const ParamForm zero = d_param(constant);
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_EQ(zero.at(0, k), 0.0);

  // d(u2 du1) = du2 ^ du1 = -du1 ^ du2.
  const ParamForm alpha(b, 1, {nodal(b, var(2, 1)), std::vector<double>(b.size(), 0.0)});
  const ParamForm da = d_param(alpha);
  ASSERT_EQ(da.degree(), 2);
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_NEAR(da.at(0, k), -1.0, 1e-12);
  EXPECT_NEAR(integrate_box(da), -1.0, 1e-12);
  EXPECT_NEAR(integrate_boundary(alpha), -1.0, 1e-14);
}

TEST(ParamForms, DifferentialSquaredVanishes) {
  std::mt19937_64 rng(8);
  const ParamBox b({0.0, -0.5, 0.2}, {1.0, 0.5, 0.9}, {9, 8, 10});
  std::vector<std::vector<double>> c0{nodal(b, Polynomial::random(3, 4, rng))};
  const ParamForm f(b, 0, c0);
  const ParamForm ddf = d_param(d_param(f));
  std::vector<std::vector<double>> c1;
  for (int i = 0; i < 3; ++i) c1.push_back(nodal(b, Polynomial::random(3, 4, rng)));
  const ParamForm ddg = d_param(d_param(ParamForm(b, 1, c1)));
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (!b.interior(k)) continue;
    for (std::size_t i = 0; i < ddf.indices().size(); ++i) EXPECT_LE(std::abs(ddf.at(i, k)), 1e-9);
    EXPECT_LE(std::abs(ddg.at(0, k)), 1e-9);
  }
}

TEST(ParamForms, DiscreteStokesConverges) {
  std::mt19937_64 rng(31);
  for (int m : {2, 3}) {
    std::vector<Polynomial> coeffs;
    for (std::size_t i = 0; i < increasing_multi_indices(m, m - 1).size(); ++i) {
      coeffs.push_back(Polynomial::random(m, 3, rng));
    }
    std::vector<double> steps, res;
    for (int nodes : {21, 41, 81}) {
      const ParamBox b(std::vector<double>(m, 0.0), std::vector<double>(m, 1.0),
                       std::vector<int>(m, nodes));
      std::vector<std::vector<double>> c;
      for (const auto& p : coeffs) c.push_back(nodal(b, p));
      const ParamForm alpha(b, m - 1, c);
      steps.push_back(b.h(0));
      res.push_back(std::abs(integrate_box(d_param(alpha)) - integrate_boundary(alpha)));
    }
    const OrderFit fit = fit_order(steps, res);
    EXPECT_TRUE(fit.at_floor || fit.order >= 1.9) << "m = " << m << " order " << fit.order;
  }
}

// ---------------------------------------------------------------------------
// Pullback

TEST(Pullback, ZeroFormGivesZero) {
  const NonpureMap f = tf::planar_translation(0.1, tf::param_patch({0.5, 0.5}, 0.1, 4));
  const ParamForm p = pullback(f, SpaceForm::zero(2, 1));
  for (std::size_t i = 0; i < p.indices().size(); ++i) {
    for (std::size_t k = 0; k < f.params().size(); ++k) EXPECT_EQ(p.at(i, k), 0.0);
  }
  EXPECT_EQ(naturality_residual(f, SpaceForm::zero(2, 1)).max_abs, 0.0);
}

TEST(Pullback, FunctionPullsBackToExpectation) {
  const NonpureMap f = tf::planar_stream_perturbed(0.05, tf::param_patch({0.5, 0.5}, 0.05, 4));
  const Polynomial g = var(2, 0) * var(2, 1) + 0.3 * (var(2, 0) * var(2, 0) * var(2, 0));
  const ParamForm p = pullback(f, poly_form(2, 0, {g}));
  for (std::size_t k = 0; k < f.params().size(); ++k) {
    const double direct = integrate(f.slice(k).rho.scalar() * sample(f.space(), g.fn()));
    EXPECT_NEAR(p.at(0, k), direct, 1e-14);
  }
}

TEST(Pullback, RejectsDegreeAboveParameterDimension) {
  const NonpureMap f = tf::example_affine(0.1, 4);
  std::mt19937_64 rng(3);
  EXPECT_THROW(pullback(f, random_form(2, 2, 1, rng)), DegreeError);
  EXPECT_THROW(pullback(f, random_form(3, 1, 1, rng)), ShapeMismatch);
}

TEST(Pullback, NarrowBumpApproachesThePurePullback) {
  // Oracle: (X* omega)_j(u) = omega(X(u); dX/du_j), error O(R^2).
  const SpaceForm omega = planar_one_form();
  const ParamPath x = tf::planar_path();
  const ParamBox params = tf::param_patch({0.5, 0.5}, 0.1, 4);
  std::vector<double> radii, errs;
  for (double r : {0.4, 0.2, 0.1}) {
    const NonpureMap f = tf::planar_translation(r / 8.0, params, r);
    const ParamForm p = pullback(f, omega);
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const auto u = params.point(k);
      std::vector<double> xu(2), dx(2);
      x.position(u, xu);
      for (int j = 0; j < 2; ++j) {
        x.partial(u, j, dx);
        const double pure = eval_space_form(omega, xu, {dx});
        worst = std::max(worst, std::abs(p.at(j, k) - pure));
      }
    }
    radii.push_back(r);
    errs.push_back(worst);
  }
  const OrderFit fit = fit_order(radii, errs);
  EXPECT_GE(fit.order, 1.9);
  EXPECT_LE(fit.order, 2.1);
}

// ---------------------------------------------------------------------------
// Naturality

TEST(Naturality, AffineFamily) {
  const Polynomial x = var(2, 0), y = var(2, 1);
  const SpaceForm g = poly_form(2, 0, {x * x * y + 0.2 * (x * x * x) - y * y});
  std::vector<double> steps, res;
  for (int level = 0; level < 3; ++level) {
    const double h = 0.05 / (1 << level);
    const int intervals = 13 << level;
    const NonpureMap f = tf::example_affine(h, intervals);
    steps.push_back(h);
    res.push_back(naturality_residual(f, g).max_abs);
  }
  const OrderFit fit = fit_order(steps, res);
  EXPECT_GE(fit.order, 1.9) << res[0] << " " << res[1] << " " << res[2];
}

TEST(Naturality, CurvedTranslationFamily) {
  const SpaceForm omega = planar_one_form();
  std::vector<double> steps, res;
  for (double h : {0.05, 0.025, 0.0125}) {
    const NonpureMap f = tf::planar_translation(h, tf::param_patch({0.5, 0.5}, 1.3 * h));
    steps.push_back(h);
    res.push_back(naturality_residual(f, omega).max_abs);
  }
  const OrderFit fit = fit_order(steps, res);
  EXPECT_GE(fit.order, 1.9) << res[0] << " " << res[1] << " " << res[2];
}

TEST(Naturality, SurfaceFamily) {
  const SpaceForm omega = poly_form(3, 1, surface_field());
  std::vector<double> steps, res;
  for (double h : {0.1, 0.05, 0.025}) {
    const NonpureMap f = tf::surface_translation(h, tf::param_patch({0.5, 0.5}, 1.3 * h), 0.4);
    steps.push_back(h);
    res.push_back(naturality_residual(f, omega).max_abs);
  }
  const OrderFit fit = fit_order(steps, res);
  EXPECT_GE(fit.order, 1.9) << res[0] << " " << res[1] << " " << res[2];
}

TEST(Naturality, ExactFormsStayNaturalWithoutCompatibility) {
  // With the continuity equations alone, exact forms still commute with the
  // pullback while a generic 1-form picks up int rho omega(curvature).
  const Polynomial x = var(2, 0), y = var(2, 1);
  const SpaceForm dg = d_space(poly_form(2, 0, {x * x * y - y * y * y + x}));
  const SpaceForm generic = planar_one_form();
  std::vector<double> steps, exact_res, generic_res;
  for (double h : {0.05, 0.025, 0.0125}) {
    const NonpureMap f = tf::planar_stream_perturbed(h, tf::param_patch({0.5, 0.5}, 1.3 * h));
    steps.push_back(h);
    exact_res.push_back(naturality_residual(f, dg).max_abs);
    generic_res.push_back(naturality_residual(f, generic).max_abs);
  }
  const OrderFit exact_fit = fit_order(steps, exact_res);
  const OrderFit generic_fit = fit_order(steps, generic_res);
  EXPECT_GE(exact_fit.order, 1.9);
  EXPECT_LT(std::abs(generic_fit.order), 0.2) << generic_res[0] << " " << generic_res[2];
  EXPECT_GT(generic_res.back(), 10.0 * exact_res.back());
}

// ---------------------------------------------------------------------------
// Stokes

TEST(Stokes, ClosedFormHasVanishingSides) {
  const Polynomial x = var(2, 0), y = var(2, 1);
  const SpaceForm dg = d_space(poly_form(2, 0, {x * x * y + 0.5 * (y * y * y)}));
  const ParamBox params({0.0, 0.0}, {1.0, 1.0}, {11, 11});
  const StokesResult r = stokes_residual(tf::planar_translation(0.05, params), dg);
  EXPECT_LE(std::abs(r.lhs), 1e-12);
  EXPECT_LE(std::abs(r.rhs), 0.1 * 0.1);
}

TEST(Stokes, PlanarJointRefinement) {
  const SpaceForm omega = planar_one_form();
  std::vector<double> steps, res;
  for (int level = 0; level < 3; ++level) {
    const double h = 0.1 / (1 << level);
    const int intervals = 5 << level;
    const ParamBox params({0.0, 0.0}, {1.0, 1.0}, {intervals + 1, intervals + 1});
    const StokesResult r = stokes_residual(tf::planar_translation(h, params), omega);
    steps.push_back(h);
    res.push_back(r.diff);
  }
  const OrderFit fit = fit_order(steps, res);
  EXPECT_GE(fit.order, 1.9) << res[0] << " " << res[1] << " " << res[2];
}

TEST(Stokes, SurfaceParameterRefinement) {
  const SpaceForm omega = poly_form(3, 1, surface_field());
  std::vector<double> steps, res;
  for (int intervals : {5, 10, 20}) {
    const ParamBox params({0.0, 0.0}, {1.0, 1.0}, {intervals + 1, intervals + 1});
    const StokesResult r = stokes_residual(tf::surface_translation(0.1, params, 0.4), omega);
    steps.push_back(1.0 / intervals);
    res.push_back(r.diff);
  }
  const OrderFit fit = fit_order(steps, res);
  EXPECT_GE(fit.order, 1.9) << res[0] << " " << res[1] << " " << res[2];
}

TEST(Stokes, RejectsWrongDegree) {
  const ParamBox params({0.0, 0.0}, {1.0, 1.0}, {5, 5});
  const NonpureMap f = tf::planar_translation(0.1, params);
  EXPECT_THROW(stokes_residual(f, poly_form(2, 0, {var(2, 0)})), DegreeError);
  EXPECT_NO_THROW(stokes_residual(f, planar_one_form()));
}
