#pragma once

#include "hawking/background.hpp"

#include <boost/rational.hpp>

#include <array>
#include <iosfwd>
#include <vector>

namespace hawking {

using Mat4 = Eigen::Matrix4d;
using Rational = boost::rational<long long>;

/// Rank-4 tensor on R^4, index (a, b, c, d) -> 64a + 16b + 4c + d.
template <class T>
struct Tensor4D {
  std::array<T, 256> v{};
  T& operator()(int a, int b, int c, int d) { return v[64 * a + 16 * b + 4 * c + d]; }
  const T& operator()(int a, int b, int c, int d) const { return v[64 * a + 16 * b + 4 * c + d]; }
};

/// Spacetime curvature at p in an orthonormal frame (e_0 timelike, e_1..e_3 tangent to the slice),
/// eta = diag(-1, 1, 1, 1). Same slot convention as the slice: Rm(X,Y,Z,W) = <R(X,Y)W, Z>,
/// Ric_bd = eta^ac Rm_abcd.
struct SpacetimeCurvatureAtPoint {
  Tensor4D<double> rm4;
  Mat4 ric4 = Mat4::Zero();
  double sc4 = 0.0;
  double slice_scalar = 0.0;  // Sc of the slice
  Mat3 k = Mat3::Zero();      // slice second fundamental form, frame components

  /// Ric4, Sc4 by contraction; validates symmetries and the Gauss equation.
  static SpacetimeCurvatureAtPoint from_riemann(const Tensor4D<double>& rm4, double slice_scalar, const Mat3& k);
  /// Slice curvature and k (Gauss, Codazzi) plus the undetermined electric part Rm4(e0, e_i, e0, e_j).
  static SpacetimeCurvatureAtPoint from_slice(const CurvatureAtPoint& c, const Mat3& electric);
  /// Free Ric4 and Sc4 alongside Rm4 (checked for symmetries only); the slice scalar follows from Gauss.
  static SpacetimeCurvatureAtPoint formal(const Tensor4D<double>& rm4, const Mat4& ric4, double sc4, const Mat3& k);

  double ric(const Eigen::Vector4d& a, const Eigen::Vector4d& b) const { return a.dot(ric4 * b); }
  double rm(const Eigen::Vector4d& a, const Eigen::Vector4d& b, const Eigen::Vector4d& c,
            const Eigen::Vector4d& d) const;
};

/// Throws InvalidCurvature unless Rm has the pair antisymmetries, pair symmetry and first Bianchi identity.
void check_riemann_symmetries(const Tensor4D<double>& rm4, double tol = 1e-12);

struct LightCutValues {
  Mat2 metric_correction;  // g = l^2 (eta + C) in the unit frame (e_theta, e_phi) at x
  double theta_plus = 0.0, theta_minus = 0.0, H = 0.0, Sc = 0.0;
};

/// Truncated light-cut expansions at affine parameter l in direction x (unit).
LightCutValues lightcut_expansions(const SpacetimeCurvatureAtPoint& s, double l, const Vec3& x);

struct GeodesicSideValues {
  double H = 0.0, Sc = 0.0;
};

/// Geodesic-sphere H and Sc with the slice Ricci written through the Gauss equation.
GeodesicSideValues geodesic_side_expansions(const SpacetimeCurvatureAtPoint& s, double r, const Vec3& x);

/// Quartic area expansions.
double geodesic_sphere_area(const SpacetimeCurvatureAtPoint& s, double r);
double lightcut_area(const SpacetimeCurvatureAtPoint& s, double l);

struct RadiusMatch {
  double r = 0.0;
  double closed_form_leading = 0.0;   // l + right-hand side at r = l
  double closed_form_implicit = 0.0;  // l + right-hand side at the Newton r, with its prefactor
  int iterations = 0;
};

/// Solves |S_r| = |Sigma_l| by Newton. Throws NoRoot when the expansions are not monotone.
RadiusMatch radius_matching(const SpacetimeCurvatureAtPoint& s, double l);

struct ComparisonRow {
  double l = 0.0;
  bool no_root = false;
  RadiusMatch match;
  double energy_geo = 0.0, energy_lc = 0.0, excess = 0.0;
  double dH_sample = 0.0, dSc_sample = 0.0;  // H_G - H_lc, Sc_G - Sc_lc at the sample direction
  std::vector<double> H_G, H_lc, Sc_G, Sc_lc;  // over the report directions
};

struct ComparisonReport {
  std::vector<Vec3> directions;
  Vec3 sample = Vec3(0.0, 0.0, 1.0);
  std::vector<ComparisonRow> rows;
  double traceless_k_sq = 0.0;
  double excess_fit = 0.0;               // l^3 coefficient fitted from the rows
  double excess_substitution = 0.0;      // (1/10)|k°|^2
  double excess_stated = 0.0;            // (6/5)|k°|^2
  double energy_geo_coefficient = 0.0;   // (1/12)(Sc + 3/5 (tr k)^2 + 1/5 |k|^2)
  double energy_lc_coefficient = 0.0;    // (1/12)(Sc + (tr k)^2 - |k|^2)
};

ComparisonReport comparison_report(const SpacetimeCurvatureAtPoint& s, const std::vector<double>& l_values,
                                   const std::vector<Vec3>& directions = {}, const Vec3& sample = Vec3(0, 0, 1));

/// CSV columns: l, r, E_geo, E_lc, excess, dH, dSc, no_root.
void write_comparison_csv(const ComparisonReport& rep, std::ostream& os);

/// l^4 coefficient of |Sigma_l| in units of pi, integrating the trace of the metric correction
/// over S^2 with exact moment integrals.
Rational lightcut_area_coefficient_exact(const Tensor4D<Rational>& rm4);
/// -(2/9)(4 Ric4(e0, e0) + Sc4) in units of pi, by exact contraction.
Rational lightcut_area_target_exact(const Tensor4D<Rational>& rm4);

}  // namespace hawking
