#include "hawking/harmonics.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <numbers>

namespace hawking {

namespace {

// Normalized associated Legendre functions with 2 pi int_{-1}^{1} P_lm^2 = 1,
// and their theta derivatives, for 0 <= m <= l <= L.
void legendre(int L, double theta, Eigen::MatrixXd& P, Eigen::MatrixXd& dP) {
  const double c = std::cos(theta), s = std::sin(theta);
  P.setZero(L + 1, L + 1);
  dP.setZero(L + 1, L + 1);
  P(0, 0) = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int m = 1; m <= L; ++m) P(m, m) = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * P(m - 1, m - 1);
  for (int m = 0; m < L; ++m) P(m + 1, m) = std::sqrt(2.0 * m + 3.0) * c * P(m, m);
  for (int m = 0; m <= L; ++m)
    for (int l = m + 2; l <= L; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      double b = std::sqrt(((l - 1.0) * (l - 1.0) - double(m) * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      P(l, m) = a * (c * P(l - 1, m) - b * P(l - 2, m));
    }
  // Ladder form of the theta derivative; free of the 1/sin(theta) cancellation near the poles.
  for (int l = 1; l <= L; ++l) {
    dP(l, 0) = -std::sqrt(double(l) * (l + 1)) * P(l, 1);
    for (int m = 1; m <= l; ++m) {
      double up = (m < l) ? std::sqrt(double(l + m + 1) * (l - m)) * P(l, m + 1) : 0.0;
      dP(l, m) = 0.5 * (std::sqrt(double(l + m) * (l - m + 1)) * P(l, m - 1) - up);
    }
  }
}

int max_resolved_degree(int n_theta, int n_phi) { return std::min(n_theta - 1, (n_phi - 1) / 2); }

}  // namespace

SphereGrid::SphereGrid(int n_theta, int n_phi, int band_limit) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 2 || n_phi < 3) throw Error(ErrorCode::InvalidParams, "sphere grid too small");
  const int lmax = max_resolved_degree(n_theta, n_phi);
  L_ = band_limit > 0 ? band_limit : std::min(20, lmax);
  if (L_ > lmax) throw Error(ErrorCode::InvalidParams, "band limit exceeds the grid's exact degree");

  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n_theta);
  const int n = size(), nh = harmonic_count(L_);
  nodes_.resize(n);
  e_theta_.resize(n);
  e_phi_.resize(n);
  weights_.resize(n);
  Y_.resize(n, nh);
  dY_theta_.resize(n, nh);
  dY_phi_.resize(n, nh);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  Eigen::MatrixXd P, dP;
  for (int i = 0; i < n_theta; ++i) {
    double ct = 0.0, wt = 0.0;
    // glfixed orders nodes from -1 to 1; reverse so ring 0 is nearest the north pole.
    gsl_integration_glfixed_point(-1.0, 1.0, n_theta - 1 - i, &ct, &wt, table);
    const double theta = std::acos(ct), st = std::sin(theta);
    legendre(L_, theta, P, dP);
    for (int j = 0; j < n_phi; ++j) {
      const int q = i * n_phi + j;
      const double phi = j * dphi, cp = std::cos(phi), sp = std::sin(phi);
      nodes_[q] = Vec3(st * cp, st * sp, ct);
      e_theta_[q] = Vec3(ct * cp, ct * sp, -st);
      e_phi_[q] = Vec3(-sp, cp, 0.0);
      weights_[q] = wt * dphi;
      for (int l = 0; l <= L_; ++l) {
        Y_(q, harmonic_index(l, 0)) = P(l, 0);
        dY_theta_(q, harmonic_index(l, 0)) = dP(l, 0);
        dY_phi_(q, harmonic_index(l, 0)) = 0.0;
        for (int m = 1; m <= l; ++m) {
          const double cm = std::cos(m * phi), sm = std::sin(m * phi), r2 = std::sqrt(2.0);
          Y_(q, harmonic_index(l, m)) = r2 * P(l, m) * cm;
          Y_(q, harmonic_index(l, -m)) = r2 * P(l, m) * sm;
          dY_theta_(q, harmonic_index(l, m)) = r2 * dP(l, m) * cm;
          dY_theta_(q, harmonic_index(l, -m)) = r2 * dP(l, m) * sm;
          dY_phi_(q, harmonic_index(l, m)) = -r2 * m * P(l, m) * sm / st;
          dY_phi_(q, harmonic_index(l, -m)) = r2 * m * P(l, m) * cm / st;
        }
      }
    }
  }
  gsl_integration_glfixed_table_free(table);
}

HarmonicField HarmonicField::resized(int band_limit) const {
  HarmonicField out(band_limit);
  const int n = std::min(coeffs.size(), out.coeffs.size());
  out.coeffs.head(n) = coeffs.head(n);
  return out;
}

HarmonicField analyze(const SphereGrid& grid, const NodeField& values, int L) {
  if (L < 0) L = grid.band_limit();
  if (L > grid.band_limit()) throw Error(ErrorCode::InvalidParams, "analysis degree above grid band limit");
  Eigen::Map<const Eigen::VectorXd> w(grid.weights().data(), grid.size());
  HarmonicField f(L);
  f.coeffs = grid.basis().leftCols(harmonic_count(L)).transpose() * w.cwiseProduct(values);
  return f;
}

AnalysisReport analyze_checked(const SphereGrid& grid, const NodeField& values, int L) {
  AnalysisReport rep;
  rep.field = analyze(grid, values, L);
  Eigen::Map<const Eigen::VectorXd> w(grid.weights().data(), grid.size());
  const double total = w.dot(values.cwiseAbs2());
  const double kept = rep.field.coeffs.squaredNorm();
  rep.residual_fraction = total > 0.0 ? std::max(0.0, total - kept) / total : 0.0;
  rep.band_limit_exceeded = rep.residual_fraction > 1e-6;
  return rep;
}

NodeField synthesize(const HarmonicField& field, const SphereGrid& grid) {
  if (field.L > grid.band_limit()) throw Error(ErrorCode::InvalidParams, "field degree above grid band limit");
  return grid.basis().leftCols(field.coeffs.size()) * field.coeffs;
}

std::vector<Vec3> synthesize_gradient(const HarmonicField& field, const SphereGrid& grid) {
  if (field.L > grid.band_limit()) throw Error(ErrorCode::InvalidParams, "field degree above grid band limit");
  const int nc = field.coeffs.size();
  NodeField dt = grid.basis_d_theta().leftCols(nc) * field.coeffs;
  NodeField dp = grid.basis_d_phi().leftCols(nc) * field.coeffs;
  std::vector<Vec3> out(grid.size());
  for (int q = 0; q < grid.size(); ++q) out[q] = dt[q] * grid.e_theta()[q] + dp[q] * grid.e_phi()[q];
  return out;
}

void spectral_derivatives(const SphereGrid& grid, const Eigen::MatrixXd& values, Eigen::MatrixXd& d_theta,
                          Eigen::MatrixXd& d_phi) {
  Eigen::Map<const Eigen::VectorXd> w(grid.weights().data(), grid.size());
  Eigen::MatrixXd coeffs = grid.basis().transpose() * (w.asDiagonal() * values);
  d_theta = grid.basis_d_theta() * coeffs;
  d_phi = grid.basis_d_phi() * coeffs;
}

double project_K0(const HarmonicField& f) { return std::sqrt(4.0 * std::numbers::pi) * f.at(0, 0); }

Vec3 project_K1(const HarmonicField& f) {
  const double s = std::sqrt(4.0 * std::numbers::pi / 3.0);
  return s * Vec3(f.at(1, 1), f.at(1, -1), f.at(1, 0));
}

HarmonicField project_Kperp(const HarmonicField& f) {
  HarmonicField out = f;
  out.coeffs.head(std::min<Eigen::Index>(4, out.coeffs.size())).setZero();
  return out;
}

double quadrature_K0(const SphereGrid& grid, const NodeField& values) {
  Eigen::Map<const Eigen::VectorXd> w(grid.weights().data(), grid.size());
  return w.dot(values);
}

Vec3 quadrature_K1(const SphereGrid& grid, const NodeField& values) {
  Vec3 out = Vec3::Zero();
  for (int q = 0; q < grid.size(); ++q) out += grid.weights()[q] * values[q] * grid.nodes()[q];
  return out;
}

double biharmonic_symbol(int l) {
  const double e = double(l) * (l + 1);
  return e * (e - 2.0);
}

HarmonicField biharmonic_apply(const HarmonicField& f) {
  HarmonicField out = f;
  for (int l = 0; l <= f.L; ++l)
    for (int m = -l; m <= l; ++m) out.at(l, m) *= biharmonic_symbol(l);
  return out;
}

HarmonicField biharmonic_solve(const HarmonicField& rhs, double tol) {
  const int nk = std::min<int>(4, rhs.coeffs.size());
  const double kernel = rhs.coeffs.head(nk).cwiseAbs().maxCoeff();
  if (kernel > tol * std::max(1.0, rhs.coeffs.norm()))
    throw Error(ErrorCode::NotOrthogonal, "right-hand side has kernel content " + std::to_string(kernel));
  HarmonicField out(rhs.L);
  for (int l = 2; l <= rhs.L; ++l)
    for (int m = -l; m <= l; ++m) out.at(l, m) = rhs.at(l, m) / biharmonic_symbol(l);
  return out;
}

namespace {

long long count_pairings(std::vector<int>& idx) {
  if (idx.empty()) return 1;
  const int first = idx.back();
  idx.pop_back();
  long long total = 0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] != first) continue;
    std::vector<int> rest = idx;
    rest.erase(rest.begin() + j);
    total += count_pairings(rest);
  }
  idx.push_back(first);
  return total;
}

}  // namespace

boost::rational<long long> moment_integral(const std::vector<int>& indices) {
  const int n = indices.size();
  if (n > 6) throw Error(ErrorCode::UnsupportedDegree, "moment integrals are tabulated to degree 6");
  for (int i : indices)
    if (i < 0 || i > 2) throw Error(ErrorCode::InvalidParams, "coordinate index out of range");
  if (n % 2 == 1) return 0;
  // Sum over pairings of products of deltas, times 4 pi / (n + 1)!!.
  long long dfact = 1;
  for (int k = n + 1; k > 1; k -= 2) dfact *= k;
  std::vector<int> idx = indices;
  return boost::rational<long long>(4 * count_pairings(idx), dfact);
}

boost::rational<long long> moment_integral(int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) throw Error(ErrorCode::InvalidParams, "negative exponent");
  std::vector<int> idx;
  idx.insert(idx.end(), a, 0);
  idx.insert(idx.end(), b, 1);
  idx.insert(idx.end(), c, 2);
  return moment_integral(idx);
}

}  // namespace hawking
