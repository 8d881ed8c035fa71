#include "hawking/surface.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace hawking {

namespace {

// State columns: displacement from base, velocity, then transported vectors.
template <int C>
using State = Eigen::Matrix<double, 3, C>;

template <int C>
State<C> geodesic_rhs(const InitialDataSet& ds, const Vec3& base, const State<C>& s) {
  const Vec3 x = base + s.col(0);
  if (!ds.in_chart(x)) throw Error(ErrorCode::ChartExceeded, "geodesic leaves the chart");
  Tensor3 gam;
  ds.christoffel(x, gam);
  State<C> out;
  out.col(0) = s.col(1);
  for (int c = 1; c < C; ++c)
    for (int i = 0; i < 3; ++i) out(i, c) = -s.col(1).dot(gam[i] * s.col(c));
  return out;
}

template <int C>
State<C> rk4(const InitialDataSet& ds, const Vec3& base, State<C> s, int n) {
  const double h = 1.0 / n;
  for (int step = 0; step < n; ++step) {
    State<C> k1 = geodesic_rhs<C>(ds, base, s);
    State<C> k2 = geodesic_rhs<C>(ds, base, s + 0.5 * h * k1);
    State<C> k3 = geodesic_rhs<C>(ds, base, s + 0.5 * h * k2);
    State<C> k4 = geodesic_rhs<C>(ds, base, s + h * k3);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s;
}

// Integrate to t = 1, doubling the step count until the endpoint is stable.
// The test is relative to |v|, so it is invariant under rescaling of the chart.
template <int C>
State<C> shoot(const InitialDataSet& ds, const Vec3& base, const State<C>& s0, const GeodesicOptions& opt) {
  const double scale = s0.col(1).norm();
  if (scale == 0.0) return s0;
  int n = opt.min_steps;
  State<C> coarse = rk4<C>(ds, base, s0, n);
  while (2 * n <= opt.max_steps) {
    State<C> fine = rk4<C>(ds, base, s0, 2 * n);
    if ((fine.col(0) - coarse.col(0)).norm() <= opt.rel_tol * scale) return fine;
    coarse = fine;
    n *= 2;
  }
  throw Error(ErrorCode::StepSizeUnderflow, "geodesic integration did not settle within max_steps");
}

}  // namespace

Vec3 exp_displacement(const InitialDataSet& ds, const Vec3& base, const Vec3& v, const GeodesicOptions& opt) {
  if (!ds.in_chart(base)) throw Error(ErrorCode::ChartExceeded, "base point outside chart");
  State<2> s0;
  s0.col(0).setZero();
  s0.col(1) = v;
  return shoot<2>(ds, base, s0, opt).col(0);
}

Vec3 exp_map(const InitialDataSet& ds, const Vec3& base, const Vec3& v, const GeodesicOptions& opt) {
  return base + exp_displacement(ds, base, v, opt);
}

CenterFrame transported_frame(const InitialDataSet& ds, const Vec3& p, const Vec3& tau, const GeodesicOptions& opt) {
  if (!ds.in_chart(p)) throw Error(ErrorCode::ChartExceeded, "base point outside chart");
  CenterFrame cf;
  cf.p = p;
  cf.tau = tau;
  const Mat3 E = orthonormal_frame(ds.metric(p));
  State<5> s0;
  s0.col(0).setZero();
  s0.col(1) = E * tau;
  s0.rightCols<3>() = E;
  if (tau.isZero(0.0)) {
    cf.c = p;
    cf.E = E;
    return cf;
  }
  State<5> s = shoot<5>(ds, p, s0, opt);
  cf.c = p + s.col(0);
  cf.E = s.rightCols<3>();
  return cf;
}

double EmbeddedSurface::area() const {
  double a = 0.0;
  for (int q = 0; q < size(); ++q) a += grid->weights()[q] * dmu[q];
  return a;
}

EmbeddedSurface graph_surface(const InitialDataSet& ds, const CenterFrame& cf, double r, const HarmonicField& phi,
                              std::shared_ptr<const SphereGrid> grid, const GeodesicOptions& opt) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidParams, "radius must be positive");
  NodeField ph = phi.is_zero() ? NodeField::Zero(grid->size()) : synthesize(phi, *grid);
  for (int q = 0; q < grid->size(); ++q)
    if (!(1.0 + ph[q] > 0.0)) throw Error(ErrorCode::NonEmbedded, "1 + phi <= 0 at a node");
  EmbeddedSurface s;
  s.grid = grid;
  s.center = cf.c;
  s.p = cf.p;
  s.tau = cf.tau;
  s.frame = cf.E;
  s.r = r;
  s.phi = phi;
  s.displacement.resize(grid->size());
  for (int q = 0; q < grid->size(); ++q)
    s.displacement[q] = exp_displacement(ds, cf.c, r * (1.0 + ph[q]) * (cf.E * grid->nodes()[q]), opt);
  fundamental_forms(ds, s);
  return s;
}

EmbeddedSurface graph_surface(const InitialDataSet& ds, const Vec3& p, const Vec3& tau, double r,
                              const HarmonicField& phi, std::shared_ptr<const SphereGrid> grid,
                              const GeodesicOptions& opt) {
  return graph_surface(ds, transported_frame(ds, p, tau, opt), r, phi, std::move(grid), opt);
}

EmbeddedSurface geodesic_sphere(const InitialDataSet& ds, const Vec3& p, const Vec3& tau, double r,
                                std::shared_ptr<const SphereGrid> grid, const GeodesicOptions& opt) {
  return graph_surface(ds, p, tau, r, HarmonicField(), std::move(grid), opt);
}

EmbeddedSurface surface_from_positions(const InitialDataSet& ds, const Vec3& center,
                                       const std::vector<Vec3>& displacement, std::shared_ptr<const SphereGrid> grid) {
  if (static_cast<int>(displacement.size()) != grid->size())
    throw Error(ErrorCode::InvalidParams, "one displacement per grid node required");
  EmbeddedSurface s;
  s.grid = grid;
  s.center = center;
  s.p = center;
  s.displacement = displacement;
  double rmean = 0.0;
  for (int q = 0; q < grid->size(); ++q) rmean += grid->weights()[q] * displacement[q].norm();
  s.r = rmean / (4.0 * std::numbers::pi);
  fundamental_forms(ds, s);
  return s;
}

void fundamental_forms(const InitialDataSet& ds, EmbeddedSurface& s) {
  const SphereGrid& grid = *s.grid;
  const int n = grid.size();
  s.X.resize(n);
  s.ambient.resize(n);
  Eigen::MatrixXd d(n, 3);
  for (int q = 0; q < n; ++q) {
    s.X[q] = s.center + s.displacement[q];
    d.row(q) = s.displacement[q].transpose();
    s.ambient[q] = ambient_at(ds, s.X[q]);
  }
  Eigen::MatrixXd dt, dp;
  spectral_derivatives(grid, d, dt, dp);

  s.T.resize(n);
  s.nu.resize(n);
  Eigen::MatrixXd nu(n, 3);
  for (int q = 0; q < n; ++q) {
    const auto& a = s.ambient[q];
    s.T[q] = {dt.row(q).transpose(), dp.row(q).transpose()};
    // Conormal T_theta x T_phi annihilates both tangents; raise and normalize.
    Vec3 conormal = s.T[q][0].cross(s.T[q][1]);
    Vec3 raised = a.g_inv * conormal;
    double norm2 = conormal.dot(raised);
    if (!(norm2 > 0.0)) throw Error(ErrorCode::DegenerateInducedMetric, "tangent vectors are dependent");
    s.nu[q] = raised / std::sqrt(norm2);
    nu.row(q) = s.nu[q].transpose();
  }
  spectral_derivatives(grid, nu, dt, dp);

  s.d_nu.resize(n);
  s.G.resize(n);
  s.B.resize(n);
  s.H.resize(n);
  s.traceless_B_sq.resize(n);
  s.P.resize(n);
  s.dmu.resize(n);
  for (int q = 0; q < n; ++q) {
    const auto& a = s.ambient[q];
    s.d_nu[q] = {dt.row(q).transpose(), dp.row(q).transpose()};
    Mat2 G, B;
    std::array<Vec3, 2> cov;  // nabla_{T_a} nu
    for (int i = 0; i < 2; ++i) {
      Vec3 corr;
      for (int m = 0; m < 3; ++m) corr[m] = s.T[q][i].dot(a.christoffel[m] * s.nu[q]);
      cov[i] = s.d_nu[q][i] + corr;
    }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        G(i, j) = s.T[q][i].dot(a.g * s.T[q][j]);
        B(i, j) = cov[i].dot(a.g * s.T[q][j]);
      }
    B = 0.5 * (B + B.transpose()).eval();
    const double det = G.determinant();
    if (!(det > 0.0)) throw Error(ErrorCode::DegenerateInducedMetric, "det of induced metric <= 0");
    const Mat2 Gi = G.inverse();
    const Mat2 S = Gi * B;
    s.G[q] = G;
    s.B[q] = B;
    s.H[q] = S.trace();
    s.traceless_B_sq[q] = (S * S).trace() - 0.5 * s.H[q] * s.H[q];
    s.P[q] = (a.g_inv * a.k).trace() - s.nu[q].dot(a.k * s.nu[q]);
    s.dmu[q] = std::sqrt(det);
  }
}

double surface_integral(const EmbeddedSurface& s, const NodeField& f) {
  double sum = 0.0;
  for (int q = 0; q < s.size(); ++q) sum += s.grid->weights()[q] * f[q] * s.dmu[q];
  return sum;
}

double surface_integral(const EmbeddedSurface& s, const std::vector<double>& f) {
  return surface_integral(s, Eigen::Map<const NodeField>(f.data(), f.size()));
}

void write_surface_csv(const EmbeddedSurface& s, std::ostream& os) {
  os << "node,x,y,z,H,P,dmu\n" << std::setprecision(17);
  for (int q = 0; q < s.size(); ++q)
    os << q << ',' << s.X[q][0] << ',' << s.X[q][1] << ',' << s.X[q][2] << ',' << s.H[q] << ',' << s.P[q] << ','
       << s.dmu[q] << '\n';
}

}  // namespace hawking
