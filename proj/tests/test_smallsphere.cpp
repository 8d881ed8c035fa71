#include "hawking/smallsphere.hpp"

#include "hawking/harmonics.hpp"
#include "hawking/surface.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace hawking;

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kEta[4] = {-1.0, 1.0, 1.0, 1.0};

// Kulkarni-Nomizu product A o B of symmetric 4x4 tensors: has every algebraic curvature symmetry.
template <class T, class M>
void add_kulkarni_nomizu(Tensor4D<T>& rm, const M& A, const M& B) {
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
          rm(a, b, c, d) += A(a, c) * B(b, d) + A(b, d) * B(a, c) - A(a, d) * B(b, c) - A(b, c) * B(a, d);
}

Mat4 random_symmetric(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

Tensor4D<double> random_riemann(std::mt19937& rng, double scale) {
  Tensor4D<double> rm;
  for (int n = 0; n < 3; ++n) add_kulkarni_nomizu(rm, random_symmetric(rng, scale), random_symmetric(rng, scale));
  return rm;
}

Mat3 random_sym3(std::mt19937& rng, double scale) {
  return random_symmetric(rng, scale).topLeftCorner<3, 3>();
}

// Contraction by hand; independent of the library's Ricci routine.
double scalar_of(const Tensor4D<double>& rm) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) s += kEta[a] * kEta[b] * rm(a, b, a, b);
  return s;
}

double ric00_of(const Tensor4D<double>& rm) {
  double s = 0.0;
  for (int i = 1; i < 4; ++i) s += rm(i, 0, i, 0);
  return s;
}

SpacetimeCurvatureAtPoint consistent(const Tensor4D<double>& rm, const Mat3& k) {
  const double sc = scalar_of(rm) + 2.0 * ric00_of(rm) - k.trace() * k.trace() + k.squaredNorm();
  return SpacetimeCurvatureAtPoint::from_riemann(rm, sc, k);
}

Vec3 unit(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

}  // namespace

TEST(SmallSphere, MinkowskiIsTrivial) {
  auto s = SpacetimeCurvatureAtPoint::from_riemann(Tensor4D<double>{}, 0.0, Mat3::Zero());
  const Vec3 x = Vec3(1, 2, 2) / 3.0;
  auto lc = lightcut_expansions(s, 0.1, x);
  EXPECT_DOUBLE_EQ(lc.theta_plus, 20.0);
  EXPECT_DOUBLE_EQ(lc.theta_minus, -10.0);
  EXPECT_DOUBLE_EQ(lc.H, 20.0);
  EXPECT_DOUBLE_EQ(lc.Sc, 200.0);
  EXPECT_EQ(lc.metric_correction.norm(), 0.0);
  auto m = radius_matching(s, 0.1);
  EXPECT_DOUBLE_EQ(m.r, 0.1);
  auto rep = comparison_report(s, {0.05, 0.1});
  for (const auto& row : rep.rows) EXPECT_EQ(row.excess, 0.0);
}

TEST(SmallSphere, RejectsBrokenSymmetryAndGauss) {
  Tensor4D<double> rm;
  rm(1, 2, 1, 2) = 1.0;  // missing its antisymmetric partners
  try {
    check_riemann_symmetries(rm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidCurvature);
  }
  std::mt19937 rng(1);
  auto good = random_riemann(rng, 0.5);
  Mat3 k = random_sym3(rng, 0.3);
  auto s = consistent(good, k);
  try {
    SpacetimeCurvatureAtPoint::from_riemann(good, s.slice_scalar + 1e-3, k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GaussEquationViolated);
  }
}

TEST(SmallSphere, PureTimeTimeRicci) {
  const double rho = 0.3;
  Mat4 ric = Mat4::Zero();
  ric(0, 0) = rho;
  auto s = SpacetimeCurvatureAtPoint::formal(Tensor4D<double>{}, ric, -rho, Mat3::Zero());
  EXPECT_DOUBLE_EQ(s.slice_scalar, rho);
  const double l = 0.05;
  auto lc = lightcut_expansions(s, l, Vec3(0, 0, 1));
  EXPECT_NEAR(lc.H, 2.0 / l + rho * l / 3.0, 1e-13);
  EXPECT_NEAR(lc.theta_plus, 2.0 / l - rho * l / 3.0, 1e-13);
  auto m = radius_matching(s, l);
  EXPECT_NEAR(m.closed_form_leading, l - rho * l * l * l / 18.0, 1e-16);
  EXPECT_NEAR(m.r, m.closed_form_leading, 10 * rho * rho * std::pow(l, 5));
}

TEST(SmallSphere, NullMeanCurvatureClosedForm) {
  // theta_+/2 - theta_- against 2/l + (1/3 (Ric00 - Ric(nu,nu)) - Rm(e0,nu,e0,nu)) l.
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto rm = random_riemann(rng, 1.0);
    auto s = consistent(rm, random_sym3(rng, 0.5));
    const Vec3 x = unit(rng);
    const double l = 0.07;
    double ricnn = 0.0, e = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        e += rm(0, i + 1, 0, j + 1) * x[i] * x[j];
        double r = -rm(0, i + 1, 0, j + 1);
        for (int m = 1; m < 4; ++m) r += rm(m, i + 1, m, j + 1);
        ricnn += r * x[i] * x[j];
      }
    auto lc = lightcut_expansions(s, l, x);
    EXPECT_NEAR(lc.H, 2.0 / l + ((ric00_of(rm) - ricnn) / 3.0 - e) * l, 1e-12);
    EXPECT_NEAR(lc.H, 0.5 * lc.theta_plus - lc.theta_minus, 1e-12);
  }
}

TEST(SmallSphere, MetricCorrectionTraceMatchesExactIntegrand) {
  // The area integrand (1/2) tr C at each direction, rebuilt with the projector P = I - x x^T.
  std::mt19937 rng(3);
  auto rm = random_riemann(rng, 1.0);
  auto s = consistent(rm, Mat3::Zero());
  const double l = 0.2;
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 x = unit(rng);
    const Eigen::Vector4d L(1.0, x[0], x[1], x[2]);
    const Mat3 P = Mat3::Identity() - x * x.transpose();
    double tr = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Eigen::Vector4d ei = Eigen::Vector4d::Zero(), ej = Eigen::Vector4d::Zero();
        ei[i + 1] = 1.0;
        ej[j + 1] = 1.0;
        tr += P(i, j) * s.rm(L, ei, ej, L);
      }
    auto lc = lightcut_expansions(s, l, x);
    EXPECT_NEAR(lc.metric_correction.trace(), l * l * tr / 3.0, 1e-13);
    EXPECT_NEAR(lc.metric_correction(0, 1), lc.metric_correction(1, 0), 1e-15);
  }
}

TEST(SmallSphere, ExactLightCutAreaIdentity) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> u(-6, 6);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor4D<Rational> rm;
    for (int n = 0; n < 3; ++n) {
      Eigen::Matrix<Rational, 4, 4> A, B;
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
          A(i, j) = A(j, i) = Rational(u(rng), 1 + (trial % 3));
          B(i, j) = B(j, i) = Rational(u(rng), 2);
        }
      add_kulkarni_nomizu(rm, A, B);
    }
    EXPECT_EQ(lightcut_area_coefficient_exact(rm), lightcut_area_target_exact(rm)) << trial;
  }
}

TEST(SmallSphere, LightCutAreaMatchesQuadrature) {
  std::mt19937 rng(5);
  auto s = consistent(random_riemann(rng, 1.0), Mat3::Zero());
  const double l = 0.1;
  SphereGrid g(12, 24);
  double area = 0.0;
  for (int q = 0; q < static_cast<int>(g.nodes().size()); ++q)
    area += g.weights()[q] * (1.0 + 0.5 * lightcut_expansions(s, l, g.nodes()[q]).metric_correction.trace());
  area *= l * l;
  EXPECT_NEAR(area, lightcut_area(s, l), 1e-14);
}

TEST(SmallSphere, FromSliceMatchesSliceGeometry) {
  PresetParams pp;
  pp.epsilon = 0.05;
  pp.k << 0.1, 0.05, 0.0, 0.05, -0.05, 0.02, 0.0, 0.02, 0.03;
  pp.k_terms = {{0, 1, {1, 0, 0}, 0.2}, {1, 0, {1, 0, 0}, 0.2}, {2, 2, {0, 1, 0}, -0.3}};
  auto ds = preset("conformal_quadratic", pp);
  const Vec3 p(0.1, -0.05, 0.02);
  auto c = curvature_at(ds, p);
  std::mt19937 rng(2);
  auto s1 = SpacetimeCurvatureAtPoint::from_slice(c, random_sym3(rng, 1.0));
  auto s2 = SpacetimeCurvatureAtPoint::from_slice(c, random_sym3(rng, 1.0));
  EXPECT_NEAR(s1.slice_scalar, c.scalar, 1e-15);
  const Mat3 E = orthonormal_frame(c.g);
  const Mat3 ric = E.transpose() * c.ricci * E;
  const double r = 0.03;
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 x = unit(rng);
    auto g1 = geodesic_side_expansions(s1, r, x);
    auto g2 = geodesic_side_expansions(s2, r, x);
    EXPECT_NEAR(g1.Sc, 2.0 / (r * r) - 2.0 / 3.0 * x.dot(ric * x), 1e-11);
    EXPECT_NEAR(g1.H, 2.0 / r - r / 3.0 * x.dot(ric * x), 1e-12);
    EXPECT_NEAR(g1.H, g2.H, 1e-12);  // the electric part drops out
  }
}

TEST(SmallSphere, GeodesicSideAgreesWithNumericalSphere) {
  // k = a I on the conformal preset; Ric = -4 eps delta at the center, even data.
  PresetParams pp;
  pp.epsilon = 0.02;
  pp.k = Mat3::Identity() * 0.2;
  auto ds = preset("conformal_quadratic", pp);
  auto s = SpacetimeCurvatureAtPoint::from_slice(curvature_at(ds, Vec3::Zero()), Mat3::Zero());
  auto grid = std::make_shared<const SphereGrid>(16, 32);
  double prev = 0.0;
  for (double r : {0.2, 0.1}) {
    auto sph = geodesic_sphere(ds, Vec3::Zero(), Vec3::Zero(), r, grid);
    double err = 0.0;
    for (int q = 0; q < sph.size(); ++q)
      err = std::max(err, std::abs(sph.H[q] - geodesic_side_expansions(s, r, grid->nodes()[q]).H));
    EXPECT_LT(err, 1e-3 * r);
    if (prev > 0.0) EXPECT_GT(prev / err, 6.0);  // O(r^3)
    prev = err;
  }
}

TEST(SmallSphere, RadiusMatchingClosedForms) {
  std::mt19937 rng(9);
  auto s = consistent(random_riemann(rng, 1.0), random_sym3(rng, 0.5));
  double prev = 0.0;
  for (double l : {0.04, 0.02}) {
    auto m = radius_matching(s, l);
    EXPECT_NEAR(m.closed_form_implicit, m.r, 1e-15);
    const double err = std::abs(m.r - m.closed_form_leading);
    if (prev > 0.0) EXPECT_GT(prev / err, 20.0);  // O(l^5)
    prev = err;
    EXPECT_NEAR(geodesic_sphere_area(s, m.r), lightcut_area(s, l), 1e-15);
  }
}

TEST(SmallSphere, NoRootForLargeRadius) {
  Mat4 ric = Mat4::Zero();
  ric(0, 0) = 1.0;
  auto s = SpacetimeCurvatureAtPoint::formal(Tensor4D<double>{}, ric, -1.0, Mat3::Zero());
  try {
    radius_matching(s, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoRoot);
  }
  auto rep = comparison_report(s, {0.1, 2.0});
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_FALSE(rep.rows[0].no_root);
  EXPECT_TRUE(rep.rows[1].no_root);
}

TEST(SmallSphere, PureTraceKHasNoExcess) {
  const double a = 0.3;
  auto s = SpacetimeCurvatureAtPoint::from_riemann(Tensor4D<double>{}, -6.0 * a * a, Mat3::Identity() * a);
  auto rep = comparison_report(s, {0.05, 0.1});
  EXPECT_NEAR(rep.traceless_k_sq, 0.0, 1e-15);
  for (const auto& row : rep.rows) EXPECT_NEAR(row.excess, 0.0, 1e-16);
}

TEST(SmallSphere, ZeroKEnergiesAgreeToLeadingOrder) {
  std::mt19937 rng(4);
  auto s = consistent(random_riemann(rng, 1.0), Mat3::Zero());
  auto rep = comparison_report(s, {0.01, 0.02, 0.04});
  EXPECT_DOUBLE_EQ(rep.energy_geo_coefficient, rep.energy_lc_coefficient);
  EXPECT_NEAR(rep.excess_fit, 0.0, 1e-6);  // l^7 leaks into the l^3, l^5 fit
}

TEST(SmallSphere, TracelessKExcess) {
  // Rm4 = 0, k = diag(1, -1, 0): Sc = 2, |k°|^2 = 2, excess l^3 coefficient 1/5.
  Mat3 k = Vec3(1.0, -1.0, 0.0).asDiagonal();
  auto s = SpacetimeCurvatureAtPoint::from_riemann(Tensor4D<double>{}, 2.0, k);
  auto rep = comparison_report(s, {0.01, 0.02, 0.03, 0.05});
  EXPECT_NEAR(rep.traceless_k_sq, 2.0, 1e-15);
  EXPECT_NEAR(rep.energy_geo_coefficient, 0.2, 1e-15);
  EXPECT_NEAR(rep.energy_lc_coefficient, 0.0, 1e-15);
  EXPECT_NEAR(rep.excess_fit, rep.excess_substitution, 1e-6);
  EXPECT_NEAR(rep.excess_stated, 2.4, 1e-15);
}

TEST(SmallSphere, EnergyCoefficientIsConcentrationScalar) {
  PresetParams pp;
  pp.epsilon = 0.03;
  pp.k << 0.1, 0.05, 0.0, 0.05, -0.05, 0.02, 0.0, 0.02, 0.03;
  auto ds = preset("conformal_quadratic", pp);
  const Vec3 p(0.05, 0.1, 0.0);
  auto s = SpacetimeCurvatureAtPoint::from_slice(curvature_at(ds, p), Mat3::Identity() * 0.1);
  auto rep = comparison_report(s, {0.02});
  EXPECT_NEAR(rep.energy_geo_coefficient, concentration_scalar(ds, p).value / 12.0, 1e-14);
}

TEST(SmallSphere, ReportDifferencesRecompute) {
  std::mt19937 rng(12);
  auto s = consistent(random_riemann(rng, 0.5), random_sym3(rng, 0.3));
  const Vec3 sample = Vec3(1, -1, 2).normalized();
  auto rep = comparison_report(s, {0.02, 0.05}, {}, sample);
  for (const auto& row : rep.rows) {
    ASSERT_FALSE(row.no_root);
    EXPECT_EQ(row.H_G.size(), rep.directions.size());
    auto g = geodesic_side_expansions(s, row.match.r, sample);
    auto c = lightcut_expansions(s, row.l, sample);
    EXPECT_NEAR(row.dH_sample, g.H - c.H, 1e-12);
    EXPECT_NEAR(row.dSc_sample, g.Sc - c.Sc, 1e-12);
    EXPECT_NEAR(row.excess, row.energy_geo - row.energy_lc, 1e-15);
  }
  std::ostringstream os;
  write_comparison_csv(rep, os);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, 32), "l,r,E_geo,E_lc,excess,dH,dSc,no_");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
