#include "hawking/el_operator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace hawking {

ResidualField make_residual(const SphereGrid& grid, NodeField values, double lambda) {
  ResidualField f;
  f.values = std::move(values);
  f.lambda = lambda;
  Eigen::Map<const Eigen::VectorXd> w(grid.weights().data(), grid.size());
  f.l2 = std::sqrt(w.dot(f.values.cwiseAbs2()));
  f.c0 = f.values.cwiseAbs().maxCoeff();
  f.pi0 = quadrature_K0(grid, f.values);
  f.pi1 = quadrature_K1(grid, f.values);
  return f;
}

NodeField laplace_beltrami(const EmbeddedSurface& s, const NodeField& u) {
  const SphereGrid& grid = *s.grid;
  const int n = grid.size();
  Eigen::MatrixXd dt, dp;
  spectral_derivatives(grid, u, dt, dp);
  // V = sqrt(G) G^-1 grad u as a tangent field of the parameter sphere.
  Eigen::MatrixXd V(n, 3);
  for (int q = 0; q < n; ++q) {
    Eigen::Vector2d du(dt(q, 0), dp(q, 0));
    Eigen::Vector2d va = s.dmu[q] * s.G[q].ldlt().solve(du);
    V.row(q) = (va[0] * grid.e_theta()[q] + va[1] * grid.e_phi()[q]).transpose();
  }
  spectral_derivatives(grid, V, dt, dp);
  NodeField out(n);
  for (int q = 0; q < n; ++q) {
    double div = grid.e_theta()[q].dot(dt.row(q).transpose()) + grid.e_phi()[q].dot(dp.row(q).transpose());
    out[q] = div / s.dmu[q];
  }
  return out;
}

ResidualParts el_parts(const EmbeddedSurface& s, double lambda) {
  const int n = s.size();
  ResidualParts out{NodeField(n), NodeField(n)};
  NodeField H = Eigen::Map<const NodeField>(s.H.data(), n);
  NodeField lapH = laplace_beltrami(s, H);
  for (int q = 0; q < n; ++q) {
    const AmbientPoint& a = s.ambient[q];
    const Vec3& nu = s.nu[q];
    const auto& T = s.T[q];
    const double h = s.H[q], P = s.P[q];
    out.w1[q] = lambda * h + lapH[q] + h * s.traceless_B_sq[q] + h * nu.dot(a.ricci * nu);

    // Contractions of nabla k: (nabla_m k)_ij = grad_k[m](i, j).
    Vec3 grad_trk, grad_knn, div_k;  // nabla_m tr k, (nabla_m k)(nu, nu), g^ij (nabla_i k)_jm
    for (int m = 0; m < 3; ++m) {
      grad_trk[m] = (a.g_inv * a.grad_k[m]).trace();
      grad_knn[m] = nu.dot(a.grad_k[m] * nu);
    }
    for (int m = 0; m < 3; ++m) {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) sum += a.g_inv(i, j) * a.grad_k[i](j, m);
      div_k[m] = sum;
    }
    const double nu_trk = nu.dot(grad_trk), nu_knn = nu.dot(grad_knn);
    const double knn = nu.dot(a.k * nu);

    const Mat2 Gi = s.G[q].inverse();
    Mat2 kT;  // k(T_a, T_b)
    Eigen::Vector2d kTn;  // k(T_a, nu)
    for (int i = 0; i < 2; ++i) {
      kTn[i] = T[i].dot(a.k * nu);
      for (int j = 0; j < 2; ++j) kT(i, j) = T[i].dot(a.k * T[j]);
    }
    const double Bk = (Gi * s.B[q] * Gi * kT).trace();
    const double divS = nu.dot(div_k) - nu_knn - h * knn + Bk;

    // Tangential derivatives of P along T_a.
    Eigen::Vector2d dP;
    const Eigen::Vector2d BGk = s.B[q] * (Gi * kTn);
    for (int i = 0; i < 2; ++i) dP[i] = T[i].dot(grad_trk) - T[i].dot(grad_knn) - 2.0 * BGk[i];
    const double k_gradP_nu = (Gi * dP).dot(kTn);

    out.w2[q] = P * (nu_trk - nu_knn) - 2.0 * P * divS + 0.5 * h * P * P - 2.0 * k_gradP_nu;
  }
  return out;
}

ResidualField el_residual(const EmbeddedSurface& s, double lambda) {
  auto parts = el_parts(s, lambda);
  return make_residual(*s.grid, parts.w1 + parts.w2, lambda);
}

EmbeddedSurface rescaled_surface(const InitialDataSet& ds, const Vec3& p, double r, const Vec3& tau,
                                 const HarmonicField& phi, std::shared_ptr<const SphereGrid> grid,
                                 const GeodesicOptions& opt) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidParams, "radius must be positive");
  CenterFrame cf = transported_frame(ds, p, tau, opt);
  InitialDataSet scaled = ds.rescaled(cf.c, r);
  CenterFrame local = cf;
  local.p = (p - cf.c) / r;
  local.c = Vec3::Zero();
  return graph_surface(scaled, local, 1.0, phi, std::move(grid), opt);
}

ResidualField rescaled_phi(const InitialDataSet& ds, const Vec3& p, double r, const Vec3& tau,
                           const HarmonicField& phi, double lambda, std::shared_ptr<const SphereGrid> grid,
                           const GeodesicOptions& opt) {
  auto s = rescaled_surface(ds, p, r, tau, phi, grid, opt);
  auto f = el_residual(s, r * r * lambda);
  f.lambda = lambda;
  return f;
}

std::pair<ResidualField, ResidualField> w_split(const InitialDataSet& ds, const Vec3& p, double r, const Vec3& tau,
                                                const HarmonicField& phi, double lambda,
                                                std::shared_ptr<const SphereGrid> grid,
                                                const GeodesicOptions& opt) {
  auto s = rescaled_surface(ds, p, r, tau, phi, grid, opt);
  auto parts = el_parts(s, r * r * lambda);
  return {make_residual(*grid, parts.w1, lambda), make_residual(*grid, parts.w2, lambda)};
}

void write_residual_csv(const SphereGrid& grid, const ResidualField& f, std::ostream& os) {
  os << "node,x,y,z,residual\n" << std::setprecision(17);
  for (int q = 0; q < grid.size(); ++q) {
    const Vec3& x = grid.nodes()[q];
    os << q << ',' << x[0] << ',' << x[1] << ',' << x[2] << ',' << f.values[q] << '\n';
  }
}

}  // namespace hawking
