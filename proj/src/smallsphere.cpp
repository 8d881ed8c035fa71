#include "hawking/smallsphere.hpp"

#include "hawking/harmonics.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace hawking {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEta[4] = {-1.0, 1.0, 1.0, 1.0};

using Vec4 = Eigen::Vector4d;

Vec4 spatial(const Vec3& x) { return Vec4(0.0, x[0], x[1], x[2]); }
const Vec4 kE0(1.0, 0.0, 0.0, 0.0);

template <class T>
T ricci_component(const Tensor4D<T>& rm, int b, int d) {
  T s = -rm(0, b, 0, d);
  for (int a = 1; a < 4; ++a) s += rm(a, b, a, d);
  return s;
}

// Unit tangents at x; any orthonormal pair at the poles.
std::array<Vec3, 2> tangent_frame(const Vec3& x) {
  const double rho = std::hypot(x[0], x[1]);
  if (rho < 1e-14) return {Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0)};
  const Vec3 ep(-x[1] / rho, x[0] / rho, 0.0);
  return {ep.cross(x), ep};
}

void check_gauss(const SpacetimeCurvatureAtPoint& s) {
  const double rhs = s.sc4 + 2.0 * s.ric4(0, 0) - s.k.trace() * s.k.trace() + s.k.squaredNorm();
  const double scale = std::max({1.0, std::abs(s.slice_scalar), std::abs(rhs)});
  if (std::abs(s.slice_scalar - rhs) > 1e-10 * scale)
    throw Error(ErrorCode::GaussEquationViolated,
                "Sc = " + std::to_string(s.slice_scalar) + " but Sc4 + 2 Ric4(e0,e0) - (tr k)^2 + |k|^2 = " +
                    std::to_string(rhs));
}

}  // namespace

void check_riemann_symmetries(const Tensor4D<double>& rm, double tol) {
  double scale = 0.0;
  for (double v : rm.v) scale = std::max(scale, std::abs(v));
  const double t = tol * std::max(1.0, scale);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const double v = rm(a, b, c, d);
          if (std::abs(v + rm(b, a, c, d)) > t || std::abs(v + rm(a, b, d, c)) > t || std::abs(v - rm(c, d, a, b)) > t ||
              std::abs(v + rm(b, c, a, d) + rm(c, a, b, d)) > t)
            throw Error(ErrorCode::InvalidCurvature, "spacetime curvature lacks Riemann symmetries");
        }
}

double SpacetimeCurvatureAtPoint::rm(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) const {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) s += rm4(i, j, p, q) * a[i] * b[j] * c[p] * d[q];
  return s;
}

SpacetimeCurvatureAtPoint SpacetimeCurvatureAtPoint::from_riemann(const Tensor4D<double>& rm4, double slice_scalar,
                                                                  const Mat3& k) {
  check_riemann_symmetries(rm4);
  SpacetimeCurvatureAtPoint s;
  s.rm4 = rm4;
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d) s.ric4(b, d) = ricci_component(rm4, b, d);
  for (int a = 0; a < 4; ++a) s.sc4 += kEta[a] * s.ric4(a, a);
  s.slice_scalar = slice_scalar;
  s.k = k;
  check_gauss(s);
  return s;
}

SpacetimeCurvatureAtPoint SpacetimeCurvatureAtPoint::from_slice(const CurvatureAtPoint& c, const Mat3& electric) {
  if (!electric.isApprox(electric.transpose(), 1e-12))
    throw Error(ErrorCode::InvalidCurvature, "electric part must be symmetric");
  const Mat3 E = orthonormal_frame(c.g);
  const Mat3 k = E.transpose() * c.k * E;
  // Frame components of the slice curvature and of grad k.
  Tensor4D<double> rm;
  auto slice_rm = [&](int a, int b, int p, int q) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int m = 0; m < 3; ++m)
          for (int n = 0; n < 3; ++n) s += E(i, a) * E(j, b) * E(m, p) * E(n, q) * c.riemann(i, j, m, n);
    return s;
  };
  auto grad_k = [&](int a, int b, int p) {
    double s = 0.0;
    for (int m = 0; m < 3; ++m)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += E(m, a) * E(i, b) * E(j, p) * c.grad_k[m](i, j);
    return s;
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
          rm(i + 1, j + 1, p + 1, q + 1) = slice_rm(i, j, p, q) + k(i, p) * k(j, q) - k(i, q) * k(j, p);
      // Codazzi: Rm4(e_i, e_j, e_0, e_l) = (grad_j k)_il - (grad_i k)_jl.
      for (int l = 0; l < 3; ++l) {
        const double v = grad_k(j, i, l) - grad_k(i, j, l);
        rm(i + 1, j + 1, 0, l + 1) = v;
        rm(i + 1, j + 1, l + 1, 0) = -v;
        rm(0, l + 1, i + 1, j + 1) = v;
        rm(l + 1, 0, i + 1, j + 1) = -v;
      }
      rm(0, i + 1, 0, j + 1) = electric(i, j);
      rm(i + 1, 0, j + 1, 0) = electric(i, j);
      rm(0, i + 1, j + 1, 0) = -electric(i, j);
      rm(i + 1, 0, 0, j + 1) = -electric(i, j);
    }
  return from_riemann(rm, c.scalar, k);
}

SpacetimeCurvatureAtPoint SpacetimeCurvatureAtPoint::formal(const Tensor4D<double>& rm4, const Mat4& ric4, double sc4,
                                                            const Mat3& k) {
  check_riemann_symmetries(rm4);
  if (!ric4.isApprox(ric4.transpose(), 1e-12)) throw Error(ErrorCode::InvalidCurvature, "Ric4 must be symmetric");
  SpacetimeCurvatureAtPoint s;
  s.rm4 = rm4;
  s.ric4 = ric4;
  s.sc4 = sc4;
  s.k = k;
  s.slice_scalar = sc4 + 2.0 * ric4(0, 0) - k.trace() * k.trace() + k.squaredNorm();
  return s;
}

LightCutValues lightcut_expansions(const SpacetimeCurvatureAtPoint& s, double l, const Vec3& x) {
  const Vec4 nu = spatial(x);
  const Vec4 L = kE0 + nu;
  const Vec4 Lb = 0.5 * (kE0 - nu);
  LightCutValues v;
  const auto t = tangent_frame(x);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) v.metric_correction(a, b) = s.rm(L, spatial(t[a]), spatial(t[b]), L) * l * l / 3.0;
  v.theta_plus = 2.0 / l - s.ric(L, L) * l / 3.0;
  v.theta_minus = -1.0 / l - (2.0 / 3.0 * s.ric(L, Lb) - s.rm(L, Lb, L, Lb) + s.ric(L, L) / 6.0) * l;
  v.H = 0.5 * v.theta_plus - v.theta_minus;
  v.Sc = 2.0 / (l * l) + s.sc4 + 8.0 / 3.0 * (s.ric4(0, 0) - s.ric(nu, nu)) - 4.0 * s.rm(kE0, nu, kE0, nu);
  return v;
}

GeodesicSideValues geodesic_side_expansions(const SpacetimeCurvatureAtPoint& s, double r, const Vec3& x) {
  const Vec4 nu = spatial(x);
  // Slice Ric(nu, nu) through the Gauss equation.
  const double kn = x.dot(s.k * x);
  const double ric = s.ric(nu, nu) + s.rm(kE0, nu, kE0, nu) - s.k.trace() * kn + (s.k * x).squaredNorm();
  return {2.0 / r - ric * r / 3.0, 2.0 / (r * r) - 2.0 / 3.0 * ric};
}

double geodesic_sphere_area(const SpacetimeCurvatureAtPoint& s, double r) {
  return 4.0 * kPi * r * r - 2.0 * kPi / 9.0 * std::pow(r, 4) * s.slice_scalar;
}

double lightcut_area(const SpacetimeCurvatureAtPoint& s, double l) {
  return 4.0 * kPi * l * l - 2.0 * kPi / 9.0 * std::pow(l, 4) * (4.0 * s.ric4(0, 0) + s.sc4);
}

RadiusMatch radius_matching(const SpacetimeCurvatureAtPoint& s, double l) {
  if (!(l > 0.0)) throw Error(ErrorCode::InvalidParams, "l must be positive");
  const double c_lc = 4.0 * s.ric4(0, 0) + s.sc4;
  if (!(8.0 * kPi * l - 8.0 * kPi / 9.0 * std::pow(l, 3) * c_lc > 0.0))
    throw Error(ErrorCode::NoRoot, "light-cut area expansion is not increasing at l = " + std::to_string(l));
  const double target = lightcut_area(s, l);
  RadiusMatch m;
  double r = l;
  for (m.iterations = 1; m.iterations <= 60; ++m.iterations) {
    const double d = 8.0 * kPi * r - 8.0 * kPi / 9.0 * std::pow(r, 3) * s.slice_scalar;
    if (!(d > 0.0) || !(r > 0.0)) break;
    const double step = (geodesic_sphere_area(s, r) - target) / d;
    r -= step;
    if (std::abs(step) <= 1e-15 * l) {
      m.r = r;
      const double kk = s.k.squaredNorm() - s.k.trace() * s.k.trace(), rho = s.ric4(0, 0);
      auto rhs = [&](double rr) {
        return (std::pow(rr, 4) * kk + 2.0 * (std::pow(rr, 4) - 2.0 * std::pow(l, 4)) * rho) / (rr + l);
      };
      m.closed_form_leading = l + rhs(l) / 18.0;
      m.closed_form_implicit = l + rhs(r) / (18.0 - (r * r + l * l) * s.sc4);
      return m;
    }
  }
  throw Error(ErrorCode::NoRoot, "no monotone area match at l = " + std::to_string(l));
}

ComparisonReport comparison_report(const SpacetimeCurvatureAtPoint& s, const std::vector<double>& l_values,
                                   const std::vector<Vec3>& directions, const Vec3& sample) {
  ComparisonReport rep;
  rep.sample = sample.normalized();
  if (directions.empty()) {
    SphereGrid g(6, 12);
    rep.directions = g.nodes();
  } else {
    rep.directions = directions;
  }
  const double trk = s.k.trace(), kk = s.k.squaredNorm();
  rep.traceless_k_sq = kk - trk * trk / 3.0;
  rep.energy_geo_coefficient = (s.slice_scalar + 0.6 * trk * trk + 0.2 * kk) / 12.0;
  rep.energy_lc_coefficient = (s.slice_scalar + trk * trk - kk) / 12.0;
  rep.excess_substitution = rep.traceless_k_sq / 10.0;
  rep.excess_stated = 1.2 * rep.traceless_k_sq;

  std::vector<double> ls, ex;
  for (double l : l_values) {
    ComparisonRow row;
    row.l = l;
    try {
      row.match = radius_matching(s, l);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoRoot) throw;
      row.no_root = true;
      rep.rows.push_back(row);
      continue;
    }
    const double r = row.match.r;
    row.energy_geo = rep.energy_geo_coefficient * r * r * r;
    row.energy_lc = rep.energy_lc_coefficient * l * l * l;
    row.excess = row.energy_geo - row.energy_lc;
    for (const Vec3& x : rep.directions) {
      auto g = geodesic_side_expansions(s, r, x);
      auto c = lightcut_expansions(s, l, x);
      row.H_G.push_back(g.H);
      row.H_lc.push_back(c.H);
      row.Sc_G.push_back(g.Sc);
      row.Sc_lc.push_back(c.Sc);
    }
    auto g = geodesic_side_expansions(s, r, rep.sample);
    auto c = lightcut_expansions(s, l, rep.sample);
    row.dH_sample = g.H - c.H;
    row.dSc_sample = g.Sc - c.Sc;
    ls.push_back(l);
    ex.push_back(row.excess);
    rep.rows.push_back(std::move(row));
  }
  // excess = a l^3 + b l^5
  if (ls.size() == 1) {
    rep.excess_fit = ex[0] / std::pow(ls[0], 3);
  } else if (ls.size() > 1) {
    Eigen::MatrixXd A(ls.size(), 2);
    Eigen::VectorXd b(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) {
      A(i, 0) = std::pow(ls[i], 3);
      A(i, 1) = std::pow(ls[i], 5);
      b[i] = ex[i];
    }
    rep.excess_fit = A.colPivHouseholderQr().solve(b)[0];
  }
  return rep;
}

void write_comparison_csv(const ComparisonReport& rep, std::ostream& os) {
  os << "l,r,E_geo,E_lc,excess,dH,dSc,no_root\n" << std::setprecision(17);
  for (const auto& row : rep.rows)
    os << row.l << ',' << row.match.r << ',' << row.energy_geo << ',' << row.energy_lc << ',' << row.excess << ','
       << row.dH_sample << ',' << row.dSc_sample << ',' << (row.no_root ? 1 : 0) << '\n';
}

Rational lightcut_area_coefficient_exact(const Tensor4D<Rational>& rm) {
  // |Sigma_l| = l^2 int (1 + (1/2) tr C) with tr C = (l^2 / 3) P_ij Rm(L, e_i, e_j, L),
  // P_ij = delta_ij - x_i x_j, L = e_0 + x_k e_k.
  Rational total = 0;
  for (int i = 1; i < 4; ++i)
    for (int j = 1; j < 4; ++j)
      for (int a = 0; a < 4; ++a)  // slot 0 is e_0, slot a > 0 carries x_(a-1)
        for (int b = 0; b < 4; ++b) {
          const Rational c = rm(a, i, j, b);
          if (c.numerator() == 0) continue;
          std::vector<int> mono;
          if (a > 0) mono.push_back(a - 1);
          if (b > 0) mono.push_back(b - 1);
          Rational term = (i == j) ? moment_integral(mono) : Rational(0);
          mono.push_back(i - 1);
          mono.push_back(j - 1);
          term -= moment_integral(mono);
          total += c * term;
        }
  return total / 6;
}

Rational lightcut_area_target_exact(const Tensor4D<Rational>& rm) {
  const Rational ric00 = ricci_component(rm, 0, 0);
  Rational sc4 = -ric00;
  for (int i = 1; i < 4; ++i) sc4 += ricci_component(rm, i, i);
  return Rational(-2, 9) * (4 * ric00 + sc4);
}

}  // namespace hawking
