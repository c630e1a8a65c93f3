#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "nonpure/convergence.hpp"
#include "nonpure/error.hpp"
#include "nonpure/nc.hpp"
#include "support/nc_fixtures.hpp"

using namespace nonpure;
using namespace nonpure::testing;

namespace {

template <typename F>
OrderFit fit_du(F residual_at) {
  std::vector<double> steps, res;
  for (int intervals : {8, 16, 32}) {
    steps.push_back(1.0 / intervals);
    res.push_back(residual_at(intervals));
  }
  return fit_order(steps, res);
}

}  // namespace

// ---------------------------------------------------------------------------
// Algebra

TEST(NcAlgebra, TraceKillsCommutators) {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<int> size(kMinMatrixSize, kMaxMatrixSize);
  for (int pair = 0; pair < 100; ++pair) {
    const int n = size(rng);
    const Matrix a = random_matrix(n, rng), b = random_matrix(n, rng);
    EXPECT_LE(std::abs(trace(commutator(a, b))), 1e-12);
    EXPECT_EQ(commutator(a, a).norm(), 0.0);
  }
  EXPECT_THROW(commutator(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), ShapeMismatch);
}

TEST(NcAlgebra, TraceIsFaithfulOnMatrixUnits) {
  std::mt19937_64 rng(4);
  for (int n : {2, 3, 5}) {
    const Matrix g = random_matrix(n, rng);
    Matrix rebuilt(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) rebuilt(i, j) = trace(matrix_unit(n, j, i) * g);
    }
    EXPECT_EQ((rebuilt - g).norm(), 0.0);
  }
}

TEST(NcAlgebra, DensityChecks) {
  std::mt19937_64 rng(9);
  EXPECT_TRUE(is_density(random_density(3, rng).matrix()).ok());
  Matrix bad = random_density(3, rng).matrix();
  bad(0, 1) += 1e-9;
  EXPECT_FALSE(is_density(bad).hermitian);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_FALSE(is_density(neg).positive);
  EXPECT_FALSE(is_density(Matrix::Identity(2, 2)).unit_trace);
  EXPECT_THROW(DensityMatrix{neg}, InvariantViolation);
  EXPECT_THROW(DensityMatrix(Matrix::Identity(7, 7) / 7.0), InvariantViolation);
}

TEST(NcAlgebra, MatrixExponential) {
  EXPECT_EQ((matrix_exp(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm(), 0.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.3;
  d(1, 1) = Complex(-0.4, 2.0);
  const Matrix e = matrix_exp(d);
  EXPECT_LE(std::abs(e(0, 0) - std::exp(Complex(1.3))), 1e-13 * std::abs(std::exp(1.3)));
  EXPECT_LE(std::abs(e(1, 1) - std::exp(Complex(-0.4, 2.0))), 1e-13);
  EXPECT_EQ(std::abs(e(0, 1)) + std::abs(e(1, 0)), 0.0);

  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const Matrix x = random_matrix(4, rng);
    EXPECT_LE((matrix_exp(x) * matrix_exp(-x) - Matrix::Identity(4, 4)).norm(), 1e-11);
  }
  // Spectral oracle for Hermitian and skew-Hermitian arguments up to norm 10.
  for (int t = 0; t < 20; ++t) {
    Matrix h = random_hermitian(5, rng);
    h *= 10.0 / operator_norm(h);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    const Matrix& q = eig.eigenvectors();
    for (Complex s : {Complex(1.0), kI}) {
      Eigen::VectorXcd lam = (s * eig.eigenvalues().cast<Complex>()).array().exp();
      const Matrix oracle = q * lam.asDiagonal() * q.adjoint();
      EXPECT_LE(operator_norm(matrix_exp(s * h) - oracle), 1e-12 * operator_norm(oracle));
    }
  }
  EXPECT_THROW(matrix_exp(800.0 * Matrix::Identity(2, 2)), NormOverflow);
}

// ---------------------------------------------------------------------------
// Conjugation families

TEST(NcFamily, SingleAxisContinuityIsSecondOrder) {
  std::mt19937_64 rng(21);
  const Matrix x = random_skew(3, rng);
  const DensityMatrix rho0 = random_density(3, rng);
  const OrderFit fit = fit_du([&](int intervals) {
    const NcNonpureMap f = make_conjugation_family({x}, rho0, unit_box(1, intervals));
    return nc_continuity_residual(f, 0).max_abs;
  });
  EXPECT_GE(fit.order, 1.9);
}

TEST(NcFamily, UnitaryConjugationKeepsStates) {
  std::mt19937_64 rng(22);
  const NcNonpureMap f = make_conjugation_family({random_skew(4, rng), random_skew(4, rng)},
                                                 random_density(4, rng), unit_box(2, 6));
  for (std::size_t k = 0; k < f.size(); ++k) EXPECT_TRUE(is_density(f.slice(k).rho).ok());
}

TEST(NcFamily, GeneratorsMustBeSkewUnlessAllowed) {
  std::mt19937_64 rng(23);
  const Matrix x = random_matrix(2, rng);
  const DensityMatrix rho0 = random_density(2, rng);
  EXPECT_THROW(make_conjugation_family({x}, rho0, unit_box(1, 4)), InvariantViolation);
  ConjugationOptions loose;
  loose.skew_hermitian = false;
  const NcNonpureMap f = make_conjugation_family({0.3 * x}, rho0, unit_box(1, 4), loose);
  EXPECT_LE(nc_continuity_residual(f, 0).max_abs, 0.05);
}

TEST(NcFamily, NoncommutingGeneratorsAreFlat) {
  const Matrix x1 = kI * pauli(0), x2 = 0.7 * kI * pauli(1);
  ASSERT_GT(commutator(x1, x2).norm(), 1.0);
  const DensityMatrix rho0(Matrix((Matrix::Identity(2, 2) + 0.4 * pauli(2) + 0.3 * pauli(0)) / 2.0));
  const OrderFit fit = fit_du([&](int intervals) {
    const NcNonpureMap f = make_conjugation_family({x1, x2}, rho0, unit_box(2, intervals));
    return nc_compatibility_residual(f, 0, 1).max_abs;
  });
  EXPECT_GE(fit.order, 1.9);
}

TEST(NcFamily, CommutingGeneratorsHaveNoCurvature) {
  std::mt19937_64 rng(24);
  const Matrix x1 = random_skew(3, rng);
  const Matrix x2 = 2.0 * x1;
  const NcNonpureMap f =
      make_conjugation_family({x1, x2}, random_density(3, rng), unit_box(2, 8));
  EXPECT_LE(nc_compatibility_residual(f, 0, 1).max_abs, 1e-12);
}

TEST(NcFamily, ConstantFamilyAndGaugeFreedom) {
  std::mt19937_64 rng(25);
  const DensityMatrix rho0 = random_density(3, rng);
  const ParamBox box = unit_box(1, 6);
  std::vector<NcSlice> flat(box.size(), NcSlice{rho0.matrix(), {Matrix::Zero(3, 3)}});
  EXPECT_EQ(nc_continuity_residual(NcNonpureMap(box, flat), 0).max_abs, 0.0);

  const NcNonpureMap f = make_conjugation_family({random_skew(3, rng)}, rho0, box);
  std::vector<NcSlice> shifted;
  for (std::size_t k = 0; k < f.size(); ++k) {
    NcSlice s = f.slice(k);
    s.fields[0] += Matrix::Identity(3, 3);
    shifted.push_back(s);
  }
  EXPECT_NEAR(nc_continuity_residual(NcNonpureMap(box, shifted), 0).max_abs,
              nc_continuity_residual(f, 0).max_abs, 1e-14);
}

// ---------------------------------------------------------------------------
// Mixed theorem

namespace {

struct MixedStudy {
  std::vector<double> steps, compat, mixed;
};

template <typename Perturb>
MixedStudy mixed_study(Perturb perturb) {
  std::mt19937_64 rng(31);
  const Matrix g1 = random_skew(3, rng), g2 = random_skew(3, rng);
  Matrix r = Matrix::Zero(3, 3);
  r(0, 0) = 0.5;
  r(1, 1) = 0.3;
  r(2, 2) = 0.2;
  r(0, 1) = r(1, 0) = 0.1;
  const DensityMatrix rho0(r);
  MixedStudy out;
  for (int intervals : {8, 16, 32}) {
    const NcNonpureMap base = make_conjugation_family({g1, g2}, rho0, unit_box(2, intervals));
    const NcNonpureMap f = perturb(base);
    for (int axis : {0, 1}) {
      EXPECT_NEAR(nc_continuity_residual(f, axis).max_abs,
                  nc_continuity_residual(base, axis).max_abs, 1e-12);
    }
    out.steps.push_back(1.0 / intervals);
    out.compat.push_back(nc_compatibility_residual(f, 0, 1).max_abs);
    out.mixed.push_back(nc_mixed_theorem_residual(f, 0, 1, 1e-1).max_abs);
  }
  return out;
}

}  // namespace

TEST(NcMixed, ConstantRhoPolynomialsAreAGauge) {
  const std::vector<std::vector<Complex>> poly{{0.0, kI * 2.0, 1.5}, {Complex(0.3), -kI}};
  const MixedStudy s =
      mixed_study([&](const NcNonpureMap& f) { return perturb_with_rho_polynomials(f, poly); });
  EXPECT_GE(fit_order(s.steps, s.compat).order, 1.9);
  EXPECT_GE(fit_order(s.steps, s.mixed).order, 1.9);
}

TEST(NcMixed, ParameterDependentRhoPolynomialsBreakFlatnessOnly) {
  const RhoPolynomialCoefficients poly = [](std::span<const double> u) {
    return std::vector<std::vector<Complex>>{{0.0, kI * (1.0 + 2.0 * u[1]), 1.5 * u[1]},
                                             {Complex(0.3), -kI * u[0] * u[0]}};
  };
  const MixedStudy s =
      mixed_study([&](const NcNonpureMap& f) { return perturb_with_rho_polynomials(f, poly); });
  EXPECT_GT(s.compat.back(), 0.01);
  EXPECT_GT(s.compat.back(), 1e3 * s.mixed.back());
  EXPECT_GE(fit_order(s.steps, s.mixed).order, 1.9);
}

TEST(NcMixed, PreconditionAndDegenerateCases) {
  std::mt19937_64 rng(32);
  const DensityMatrix rho0 = random_density(2, rng);
  const NcNonpureMap one = make_conjugation_family({random_skew(2, rng)}, rho0, unit_box(1, 8));
  EXPECT_EQ(nc_mixed_theorem_residual(one, 1.0).max_abs, 0.0);

  const NcNonpureMap f =
      make_conjugation_family({random_skew(2, rng), random_skew(2, rng)}, rho0, unit_box(2, 8));
  std::vector<NcSlice> wrong;
  for (std::size_t k = 0; k < f.size(); ++k) {
    NcSlice s = f.slice(k);
    s.fields[1] = random_skew(2, rng);
    wrong.push_back(s);
  }
  EXPECT_THROW(nc_mixed_theorem_residual(NcNonpureMap(f.params(), wrong), 0, 1, 1e-3),
               PreconditionViolated);
  EXPECT_THROW(nc_compatibility_residual(f, 1, 1), ShapeMismatch);
}

// ---------------------------------------------------------------------------
// Trace duality

TEST(NcDuality, IdentityAndMatrixUnits) {
  std::mt19937_64 rng(41);
  const Matrix x = random_skew(3, rng);
  const DensityMatrix rho0 = random_density(3, rng);
  std::vector<Matrix> units;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) units.push_back(matrix_unit(3, i, j));
  }
  const NcNonpureMap coarse = make_conjugation_family({x}, rho0, unit_box(1, 8));
  EXPECT_LE(trace_duality_residual(coarse, 0, {Matrix::Identity(3, 3)}).max_abs, 1e-13);
  const OrderFit fit = fit_du([&](int intervals) {
    return trace_duality_residual(make_conjugation_family({x}, rho0, unit_box(1, intervals)), 0,
                                  units)
        .max_abs;
  });
  EXPECT_GE(fit.order, 1.9);
}

TEST(NcDuality, CentralTestMatrix) {
  // Block-diagonal flow; f is constant on each block, so it commutes with
  // every rho(u) and V(u).
  std::mt19937_64 rng(42);
  Matrix x = Matrix::Zero(4, 4), r = Matrix::Zero(4, 4);
  x.block(0, 0, 2, 2) = random_skew(2, rng);
  x.block(2, 2, 2, 2) = random_skew(2, rng);
  r.block(0, 0, 2, 2) = 0.6 * random_density(2, rng).matrix();
  r.block(2, 2, 2, 2) = 0.4 * random_density(2, rng).matrix();
  Matrix f = Matrix::Identity(4, 4);
  f(2, 2) = f(3, 3) = 3.0;
  const NcNonpureMap fam = make_conjugation_family({x}, DensityMatrix(r), unit_box(1, 8));
  EXPECT_LE(trace_duality_residual(fam, 0, {f}).max_abs, 1e-12);
}

// ---------------------------------------------------------------------------
// Chevalley-Eilenberg differential

TEST(NcForms, DifferentialOfAnElement) {
  std::mt19937_64 rng(51);
  const Matrix a = random_matrix(3, rng);
  const NcForm da = ce_differential(NcForm::constant(a));
  const NcForm dda = ce_differential(da);
  for (int t = 0; t < 10; ++t) {
    const Matrix v = random_matrix(3, rng), w = random_matrix(3, rng);
    EXPECT_LE((da({v}) - commutator(v, a)).norm(), 0.0);
    EXPECT_LE(dda({v, w}).norm(), 1e-12);
  }
}

TEST(NcForms, DifferentialSquaredVanishes) {
  std::mt19937_64 rng(52);
  const std::vector<NcForm> forms{NcForm::constant(random_matrix(3, rng)),
                                  commutator_form(random_matrix(3, rng)),
                                  random_two_form(3, rng)};
  for (const auto& w : forms) {
    const NcForm dd = ce_differential(ce_differential(w));
    for (int t = 0; t < 10; ++t) {
      std::vector<Matrix> args;
      for (int i = 0; i < dd.degree(); ++i) args.push_back(random_matrix(3, rng));
      EXPECT_LE(dd(args).norm(), 1e-11) << "degree " << w.degree();
    }
  }
}

TEST(NcForms, DifferentialIsAlternating) {
  std::mt19937_64 rng(53);
  for (const NcForm& w : {commutator_form(random_matrix(3, rng)), random_two_form(3, rng)}) {
    const NcForm dw = ce_differential(w);
    std::vector<Matrix> args;
    for (int i = 0; i < dw.degree(); ++i) args.push_back(random_matrix(3, rng));
    const Matrix base = dw(args);
    for (int i = 0; i < dw.degree(); ++i) {
      for (int j = i + 1; j < dw.degree(); ++j) {
        auto s = args;
        std::swap(s[i], s[j]);
        EXPECT_LE((dw(s) + base).norm(), 1e-12);
      }
    }
  }
}

TEST(NcForms, DegreeCap) {
  const NcForm top(kMaxNcDegree + 1, [](const std::vector<Matrix>& x) { return x[0]; });
  EXPECT_THROW(ce_differential(top), DegreeError);
  EXPECT_THROW(commutator_form(Matrix::Identity(2, 2))({}), DegreeError);
}

// ---------------------------------------------------------------------------
// Pullback, naturality, Stokes

TEST(NcPullback, ZeroAndFunctions) {
  std::mt19937_64 rng(61);
  const NcNonpureMap f = make_conjugation_family({random_skew(3, rng), random_skew(3, rng)},
                                                 random_density(3, rng), unit_box(2, 5));
  const ComplexParamForm zero = nc_pullback(f, NcForm(1, [](const std::vector<Matrix>& x) {
                                              return Matrix(Matrix::Zero(x[0].rows(), x[0].cols()));
                                            }));
  const Matrix g = random_matrix(3, rng);
  const ComplexParamForm p = nc_pullback(f, NcForm::constant(g));
  for (std::size_t k = 0; k < f.size(); ++k) {
    for (std::size_t i = 0; i < zero.re.indices().size(); ++i) {
      EXPECT_EQ(zero.re.at(i, k), 0.0);
      EXPECT_EQ(zero.im.at(i, k), 0.0);
    }
    const Complex expect = trace(f.slice(k).rho * g);
    EXPECT_EQ(p.re.at(0, k), expect.real());
    EXPECT_EQ(p.im.at(0, k), expect.imag());
  }
  const NcForm three(3, [](const std::vector<Matrix>& x) { return x[0]; });
  EXPECT_THROW(nc_pullback(f, three), DegreeError);
}

TEST(NcPullback, RealityOfCommutatorForms) {
  // For skew-Hermitian V, [C, V] is Hermitian when C is Hermitian and
  // skew-Hermitian when C is, so tr(rho [C, V]) is real or imaginary.
  std::mt19937_64 rng(62);
  const NcNonpureMap f = make_conjugation_family({random_skew(3, rng), random_skew(3, rng)},
                                                 random_density(3, rng), unit_box(2, 5));
  const Matrix c = random_hermitian(3, rng);
  const ComplexParamForm herm = nc_pullback(f, commutator_form(c));
  const ComplexParamForm skew = nc_pullback(f, commutator_form(kI * c));
  double max_im = 0.0, max_re = 0.0, max_other = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    for (std::size_t i = 0; i < 2; ++i) {
      max_im = std::max(max_im, std::abs(herm.im.at(i, k)));
      max_re = std::max(max_re, std::abs(skew.re.at(i, k)));
      max_other = std::max(max_other, std::abs(herm.re.at(i, k)));
    }
  }
  EXPECT_LE(max_im, 1e-12);
  EXPECT_LE(max_re, 1e-12);
  EXPECT_GT(max_other, 1e-3);
}

TEST(NcNaturality, ConjugationFamilies) {
  const Matrix x1 = kI * pauli(0), x2 = 0.7 * kI * pauli(1);
  const DensityMatrix rho0(Matrix((Matrix::Identity(2, 2) + 0.4 * pauli(2) + 0.3 * pauli(0)) / 2.0));
  std::mt19937_64 rng(71);
  const Matrix c = random_matrix(2, rng);
  const OrderFit one = fit_du([&](int intervals) {
    return nc_naturality_residual(make_conjugation_family({x1}, rho0, unit_box(1, intervals)),
                                  NcForm::constant(c))
        .max_abs;
  });
  const OrderFit two = fit_du([&](int intervals) {
    return nc_naturality_residual(make_conjugation_family({x1, x2}, rho0, unit_box(2, intervals)),
                                  commutator_form(c))
        .max_abs;
  });
  EXPECT_GE(one.order, 1.9);
  EXPECT_GE(two.order, 1.9);
}

TEST(NcStokes, PauliGeneratorsRefinement) {
  const Matrix x1 = kI * pauli(0), x2 = 0.7 * kI * pauli(1);
  const DensityMatrix rho0(Matrix((Matrix::Identity(2, 2) + 0.4 * pauli(2) + 0.3 * pauli(0)) / 2.0));
  const Matrix c = pauli(2) + 0.5 * pauli(0);
  const OrderFit fit = fit_du([&](int intervals) {
    return nc_stokes_residual(make_conjugation_family({x1, x2}, rho0, unit_box(2, intervals)),
                              commutator_form(c))
        .diff;
  });
  EXPECT_GE(fit.order, 1.9);
}

TEST(NcStokes, FundamentalTheoremOnALine) {
  std::mt19937_64 rng(81);
  const Matrix x = random_skew(3, rng);
  const DensityMatrix rho0 = random_density(3, rng);
  const Matrix g = random_matrix(3, rng);
  const NcNonpureMap f = make_conjugation_family({x}, rho0, unit_box(1, 1 << 15));
  const NcStokesResult r = nc_stokes_residual(f, NcForm::constant(g));
  const Complex telescoped = trace(f.slice(f.size() - 1).rho * g) - trace(f.slice(0).rho * g);
  EXPECT_LE(std::abs(r.rhs - telescoped), 1e-14);
  EXPECT_LE(r.diff, 1e-10);
}

TEST(NcStokes, ExactFormHasSmallBoundaryIntegral) {
  std::mt19937_64 rng(82);
  const NcForm da = ce_differential(NcForm::constant(random_matrix(2, rng)));
  const Matrix x1 = kI * pauli(0), x2 = 0.7 * kI * pauli(1);
  const DensityMatrix rho0(Matrix((Matrix::Identity(2, 2) + 0.4 * pauli(2)) / 2.0));
  const OrderFit fit = fit_du([&](int intervals) {
    return std::abs(
        nc_stokes_residual(make_conjugation_family({x1, x2}, rho0, unit_box(2, intervals)), da).rhs);
  });
  EXPECT_TRUE(fit.at_floor || fit.order >= 1.9) << fit.order;
}
