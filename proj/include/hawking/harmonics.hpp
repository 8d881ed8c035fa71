#pragma once

// Real spherical harmonics on a Gauss-Legendre x uniform-azimuth grid.
// Basis: orthonormal, no Condon-Shortley phase, so that
//   Y_{1,1} ~ x, Y_{1,-1} ~ y, Y_{1,0} ~ z.

#include "hawking/types.hpp"

#include <boost/rational.hpp>

#include <vector>

namespace hawking {

inline constexpr int harmonic_index(int l, int m) { return l * (l + 1) + m; }
inline constexpr int harmonic_count(int L) { return (L + 1) * (L + 1); }

class SphereGrid {
 public:
  /// n_theta Gauss-Legendre rings in cos(theta), n_phi uniform azimuths.
  /// band_limit 0 selects the default min(20, largest exactly resolved degree).
  explicit SphereGrid(int n_theta = 32, int n_phi = 64, int band_limit = 0);

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int band_limit() const { return L_; }
  int size() const { return n_theta_ * n_phi_; }

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Unit tangent frame at each node: e_theta, e_phi (e_theta x e_phi = x).
  const std::vector<Vec3>& e_theta() const { return e_theta_; }
  const std::vector<Vec3>& e_phi() const { return e_phi_; }

  /// basis()(node, harmonic_index(l, m)) = Y_lm(node); d_theta / d_phi are
  /// the derivatives along e_theta and e_phi (the latter includes 1/sin(theta)).
  const Eigen::MatrixXd& basis() const { return Y_; }
  const Eigen::MatrixXd& basis_d_theta() const { return dY_theta_; }
  const Eigen::MatrixXd& basis_d_phi() const { return dY_phi_; }

 private:
  int n_theta_, n_phi_, L_;
  std::vector<Vec3> nodes_, e_theta_, e_phi_;
  std::vector<double> weights_;
  Eigen::MatrixXd Y_, dY_theta_, dY_phi_;
};

/// Real harmonic coefficients a_{l,m}, 0 <= l <= L.
struct HarmonicField {
  int L = 0;
  Eigen::VectorXd coeffs;

  HarmonicField() : coeffs(Eigen::VectorXd::Zero(1)) {}
  explicit HarmonicField(int band_limit) : L(band_limit), coeffs(Eigen::VectorXd::Zero(harmonic_count(band_limit))) {}

  double& at(int l, int m) { return coeffs[harmonic_index(l, m)]; }
  double at(int l, int m) const { return l <= L ? coeffs[harmonic_index(l, m)] : 0.0; }
  /// Copy truncated or zero-padded to band limit L.
  HarmonicField resized(int band_limit) const;
  bool is_zero() const { return coeffs.isZero(0.0); }
};

using NodeField = Eigen::VectorXd;

struct AnalysisReport {
  HarmonicField field;
  double residual_fraction = 0.0;  // energy not represented below the band limit
  bool band_limit_exceeded = false;
};

/// Analysis to degree L (default: the grid band limit).
HarmonicField analyze(const SphereGrid& grid, const NodeField& values, int L = -1);
/// Analysis plus the band-limit check (warning threshold 1e-6 of the total energy).
AnalysisReport analyze_checked(const SphereGrid& grid, const NodeField& values, int L = -1);
NodeField synthesize(const HarmonicField& field, const SphereGrid& grid);
/// Tangential gradient on the unit sphere as Cartesian vectors.
std::vector<Vec3> synthesize_gradient(const HarmonicField& field, const SphereGrid& grid);

/// Derivatives along e_theta, e_phi of node values (one field per column),
/// through analysis at the grid band limit.
void spectral_derivatives(const SphereGrid& grid, const Eigen::MatrixXd& values, Eigen::MatrixXd& d_theta,
                          Eigen::MatrixXd& d_phi);

/// Kernel projections as L2 pairings: pi0 = int f, pi1_i = int f x^i.
double project_K0(const HarmonicField& f);
Vec3 project_K1(const HarmonicField& f);
HarmonicField project_Kperp(const HarmonicField& f);

/// Pairings of node values against 1 and x^i by quadrature on the round sphere.
double quadrature_K0(const SphereGrid& grid, const NodeField& values);
Vec3 quadrature_K1(const SphereGrid& grid, const NodeField& values);

/// mu_l = l(l+1)(l(l+1) - 2), the symbol of -Delta(-Delta - 2).
double biharmonic_symbol(int l);
HarmonicField biharmonic_apply(const HarmonicField& f);
/// Unique solution in the complement of span{1, x^i}; NotOrthogonal if rhs has
/// kernel content above tol * max(1, |rhs|).
HarmonicField biharmonic_solve(const HarmonicField& rhs, double tol = 1e-10);

/// int_{S^2} x^{i_1} ... x^{i_n} as an exact multiple of pi. Odd n gives 0;
/// UnsupportedDegree for n > 6.
boost::rational<long long> moment_integral(const std::vector<int>& indices);
/// Same, for the monomial x^a y^b z^c.
boost::rational<long long> moment_integral(int a, int b, int c);

}  // namespace hawking
