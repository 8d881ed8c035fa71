#include "hawking/harmonics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace hawking;

namespace {

constexpr double kPi = std::numbers::pi;

const SphereGrid& grid() {
  static const SphereGrid g;
  return g;
}

NodeField sample(const SphereGrid& g, const std::function<double(const Vec3&)>& f) {
  NodeField v(g.size());
  for (int q = 0; q < g.size(); ++q) v[q] = f(g.nodes()[q]);
  return v;
}

double monomial(const Vec3& x, int a, int b, int c) {
  return std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], c);
}

// Independent moment oracle: 2 prod Gamma((a_i + 1)/2) / Gamma((n + 3)/2), in units of pi.
double moment_oracle(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  double v = 2.0 * std::tgamma((a + 1) / 2.0) * std::tgamma((b + 1) / 2.0) * std::tgamma((c + 1) / 2.0) /
             std::tgamma((a + b + c + 3) / 2.0);
  return v / kPi;
}

// Degree-l part of f at x by the zonal kernel (2l+1)/(4 pi) P_l(x . y).
double zonal_projection(const SphereGrid& g, const NodeField& f, int l, const Vec3& x) {
  double s = 0.0;
  for (int q = 0; q < g.size(); ++q) s += g.weights()[q] * f[q] * std::legendre(l, x.dot(g.nodes()[q]));
  return (2 * l + 1) / (4.0 * kPi) * s;
}

double degree_energy(const HarmonicField& f, int l) {
  double s = 0.0;
  for (int m = -l; m <= l; ++m) s += f.at(l, m) * f.at(l, m);
  return std::sqrt(s);
}

}  // namespace

TEST(SphereGrid, WeightsSumToSphereArea) {
  double s = 0.0;
  for (double w : grid().weights()) s += w;
  EXPECT_NEAR(s, 4.0 * kPi, 1e-12);
  EXPECT_EQ(grid().band_limit(), 20);
}

TEST(SphereGrid, BasisIsOrthonormalUpToTwiceBandLimit) {
  const auto& g = grid();
  Eigen::Map<const Eigen::VectorXd> w(g.weights().data(), g.size());
  Eigen::MatrixXd gram = g.basis().transpose() * w.asDiagonal() * g.basis();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SphereGrid, FirstHarmonicsAreCoordinates) {
  const auto& g = grid();
  const double s = std::sqrt(3.0 / (4.0 * kPi));
  for (int q = 0; q < g.size(); q += 37) {
    EXPECT_NEAR(g.basis()(q, harmonic_index(1, 1)), s * g.nodes()[q][0], 1e-14);
    EXPECT_NEAR(g.basis()(q, harmonic_index(1, -1)), s * g.nodes()[q][1], 1e-14);
    EXPECT_NEAR(g.basis()(q, harmonic_index(1, 0)), s * g.nodes()[q][2], 1e-14);
  }
}

TEST(SphereGrid, RejectsUnresolvableBandLimit) {
  EXPECT_THROW(SphereGrid(8, 16, 9), Error);
}

TEST(Harmonics, ConstantHasOnlyMonopole) {
  auto f = analyze(grid(), NodeField::Constant(grid().size(), 1.0));
  EXPECT_NEAR(f.at(0, 0), std::sqrt(4.0 * kPi), 1e-12);
  EXPECT_LT(f.coeffs.tail(f.coeffs.size() - 1).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Harmonics, CoordinateIsPureDipole) {
  auto f = analyze(grid(), sample(grid(), [](const Vec3& x) { return x[0]; }));
  EXPECT_NEAR(f.at(1, 1), std::sqrt(4.0 * kPi / 3.0), 1e-12);
  for (int l = 0; l <= f.L; ++l)
    if (l != 1) EXPECT_LT(degree_energy(f, l), 1e-13) << l;
  EXPECT_LT(std::abs(f.at(1, 0)) + std::abs(f.at(1, -1)), 1e-13);
}

TEST(Harmonics, QuarticMonomialDegreesMatchZonalOracle) {
  const auto& g = grid();
  NodeField v = sample(g, [](const Vec3& x) { return monomial(x, 2, 2, 0); });
  auto f = analyze(g, v);
  for (int l = 0; l <= f.L; ++l) {
    if (l == 0 || l == 2 || l == 4) {
      EXPECT_GT(degree_energy(f, l), 1e-3) << l;
    } else {
      EXPECT_LT(degree_energy(f, l), 1e-12) << l;
    }
  }
  // Each degree-l part agrees pointwise with the zonal-kernel projection.
  std::mt19937 rng(5);
  std::normal_distribution<double> n;
  for (int t = 0; t < 5; ++t) {
    Vec3 x(n(rng), n(rng), n(rng));
    x.normalize();
    for (int l : {0, 2, 4}) {
      HarmonicField only(f.L);
      for (int m = -l; m <= l; ++m) only.at(l, m) = f.at(l, m);
      double part = zonal_projection(g, synthesize(only, g), l, x);
      EXPECT_NEAR(part, zonal_projection(g, v, l, x), 1e-13);
    }
    double sum = zonal_projection(g, v, 0, x) + zonal_projection(g, v, 2, x) + zonal_projection(g, v, 4, x);
    EXPECT_NEAR(sum, monomial(x, 2, 2, 0), 1e-13);
  }
}

TEST(Harmonics, AnalysisSynthesisRoundTripAndParseval) {
  const auto& g = grid();
  std::mt19937 rng(1);
  std::normal_distribution<double> n;
  HarmonicField f(g.band_limit());
  for (int i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] = n(rng);
  NodeField v = synthesize(f, g);
  auto back = analyze(g, v);
  EXPECT_LT((back.coeffs - f.coeffs).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::Map<const Eigen::VectorXd> w(g.weights().data(), g.size());
  double l2 = w.dot(v.cwiseAbs2());
  EXPECT_NEAR(f.coeffs.squaredNorm(), l2, 1e-10 * l2);
}

TEST(Harmonics, BandLimitCheck) {
  const auto& g = grid();
  auto ok = analyze_checked(g, sample(g, [](const Vec3& x) { return monomial(x, 3, 1, 2); }));
  EXPECT_FALSE(ok.band_limit_exceeded);
  auto bad = analyze_checked(g, sample(g, [](const Vec3& x) { return std::exp(8.0 * x[0]) * std::abs(x[1]); }));
  EXPECT_TRUE(bad.band_limit_exceeded);
}

TEST(Harmonics, GradientOfPolynomial) {
  const auto& g = grid();
  auto f = analyze(g, sample(g, [](const Vec3& x) { return x[0] * x[0] * x[1] + x[2]; }));
  auto grad = synthesize_gradient(f, g);
  for (int q = 0; q < g.size(); ++q) {
    const Vec3& x = g.nodes()[q];
    Vec3 full(2 * x[0] * x[1], x[0] * x[0], 1.0);
    Vec3 tangential = full - full.dot(x) * x;
    EXPECT_LT((grad[q] - tangential).norm(), 1e-12);
  }
}

TEST(Harmonics, SpectralDerivativesOfSeveralFields) {
  const auto& g = grid();
  Eigen::MatrixXd v(g.size(), 2);
  for (int q = 0; q < g.size(); ++q) {
    const Vec3& x = g.nodes()[q];
    v(q, 0) = x[1] * x[2];
    v(q, 1) = x[0] * x[0] * x[0];
  }
  Eigen::MatrixXd dt, dp;
  spectral_derivatives(g, v, dt, dp);
  for (int q = 0; q < g.size(); ++q) {
    const Vec3& x = g.nodes()[q];
    Vec3 g0(0.0, x[2], x[1]), g1(3 * x[0] * x[0], 0.0, 0.0);
    EXPECT_NEAR(dt(q, 0), g0.dot(g.e_theta()[q]), 1e-12);
    EXPECT_NEAR(dp(q, 0), g0.dot(g.e_phi()[q]), 1e-12);
    EXPECT_NEAR(dt(q, 1), g1.dot(g.e_theta()[q]), 1e-12);
    EXPECT_NEAR(dp(q, 1), g1.dot(g.e_phi()[q]), 1e-12);
  }
}

TEST(Projections, ConstantAndCoordinate) {
  HarmonicField c(4);
  c.at(0, 0) = 2.5 * std::sqrt(4.0 * kPi);
  EXPECT_NEAR(project_K0(c), 4.0 * kPi * 2.5, 1e-12);
  EXPECT_LT(project_K1(c).norm(), 1e-15);

  auto x1 = analyze(grid(), sample(grid(), [](const Vec3& x) { return x[0]; }));
  EXPECT_NEAR(project_K0(x1), 0.0, 1e-13);
  EXPECT_LT((project_K1(x1) - Vec3(4.0 * kPi / 3.0, 0, 0)).norm(), 1e-12);
}

TEST(Projections, DegreeThreeIsInComplement) {
  HarmonicField y(5);
  y.at(3, -2) = 1.0;
  EXPECT_EQ(project_K0(y), 0.0);
  EXPECT_EQ(project_K1(y).norm(), 0.0);
  EXPECT_EQ(project_Kperp(y).coeffs, y.coeffs);
}

TEST(Projections, QuadratureAndSpectralPairingsAgree) {
  const auto& g = grid();
  NodeField v = sample(g, [](const Vec3& x) { return 1.0 + 2.0 * x[1] - x[2] + x[0] * x[1] * x[2] + x[0] * x[0]; });
  auto f = analyze(g, v);
  EXPECT_NEAR(project_K0(f), quadrature_K0(g, v), 1e-12);
  EXPECT_LT((project_K1(f) - quadrature_K1(g, v)).norm(), 1e-12);
}

TEST(Projections, IdempotentAndOrthogonal) {
  std::mt19937 rng(2);
  std::normal_distribution<double> n;
  HarmonicField f(10);
  for (int i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] = n(rng);
  auto p = project_Kperp(f);
  EXPECT_EQ(project_Kperp(p).coeffs, p.coeffs);
  EXPECT_EQ(project_K0(p), 0.0);
  EXPECT_EQ(project_K1(p).norm(), 0.0);
  // The K0, K1 and complement parts are mutually L2-orthogonal.
  const auto& g = grid();
  HarmonicField k0(10), k1(10);
  k0.at(0, 0) = f.at(0, 0);
  for (int m = -1; m <= 1; ++m) k1.at(1, m) = f.at(1, m);
  NodeField a = synthesize(k0, g), b = synthesize(k1, g), c = synthesize(p, g);
  Eigen::Map<const Eigen::VectorXd> w(g.weights().data(), g.size());
  EXPECT_NEAR(w.dot(a.cwiseProduct(b)), 0.0, 1e-12);
  EXPECT_NEAR(w.dot(a.cwiseProduct(c)), 0.0, 1e-12);
  EXPECT_NEAR(w.dot(b.cwiseProduct(c)), 0.0, 1e-12);
}

TEST(Biharmonic, KernelAndSymbol) {
  HarmonicField f(6);
  for (int m = -1; m <= 1; ++m) f.at(1, m) = 1.0;
  f.at(0, 0) = 3.0;
  EXPECT_TRUE(biharmonic_apply(f).is_zero());
  HarmonicField y2(6);
  y2.at(2, 0) = 1.0;
  EXPECT_NEAR(biharmonic_apply(y2).at(2, 0), 24.0, 0.0);
  for (int l = 2; l <= 20; ++l) EXPECT_GT(biharmonic_symbol(l), 0.0);
}

TEST(Biharmonic, SolveInvertsApplyOnComplement) {
  HarmonicField rhs(6);
  rhs.at(2, 0) = 24.0;
  auto u = biharmonic_solve(rhs);
  EXPECT_NEAR(u.at(2, 0), 1.0, 1e-15);
  std::mt19937 rng(4);
  std::normal_distribution<double> n;
  HarmonicField f(8);
  for (int i = 4; i < f.coeffs.size(); ++i) f.coeffs[i] = n(rng);
  EXPECT_LT((biharmonic_solve(biharmonic_apply(f)).coeffs - f.coeffs).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Biharmonic, SolveRejectsKernelContent) {
  HarmonicField rhs(4);
  rhs.at(1, 0) = 1e-6;
  rhs.at(3, 1) = 1.0;
  try {
    biharmonic_solve(rhs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotOrthogonal);
  }
}

TEST(Moments, ClosedFormValues) {
  using R = boost::rational<long long>;
  EXPECT_EQ(moment_integral({0, 1}), R(0));
  EXPECT_EQ(moment_integral({0, 0}), R(4, 3));
  EXPECT_EQ(moment_integral(4, 0, 0), R(4, 5));
  EXPECT_EQ(moment_integral(2, 2, 2), R(4, 105));
  EXPECT_EQ(moment_integral(0, 0, 0), R(4));
  EXPECT_EQ(moment_integral({2, 2, 1}), R(0));
}

TEST(Moments, ExactValuesMatchGammaOracleAndQuadrature) {
  const auto& g = grid();
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; a + b <= 6; ++b)
      for (int c = 0; a + b + c <= 6; ++c) {
        auto q = moment_integral(a, b, c);
        double exact = boost::rational_cast<double>(q);
        EXPECT_NEAR(exact, moment_oracle(a, b, c), 1e-14) << a << b << c;
        double quad = 0.0;
        for (int n = 0; n < g.size(); ++n) quad += g.weights()[n] * monomial(g.nodes()[n], a, b, c);
        EXPECT_NEAR(quad, exact * kPi, 1e-12) << a << b << c;
      }
}

TEST(Moments, DegreeAboveSixUnsupported) {
  try {
    moment_integral(8, 0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedDegree);
  }
}
