#include "hawking/reduction_solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace hawking {

namespace {

constexpr double kPi = std::numbers::pi;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Polynomial whose pi_perp part drives phi0: the r^2 coefficient of Phi on geodesic spheres
// with the constants dropped, in the orthonormal frame at p.
double phi0_source(const Mat3& ric, const Mat3& k, const Vec3& x) {
  const double kxx = x.dot(k * x);
  return 4.0 * x.dot(ric * x) + 6.0 * k.trace() * kxx + 4.0 * (k * x).squaredNorm() - 9.0 * kxx * kxx;
}

// Unknowns (tau, lambda, phi_{l >= 2}) and rows (pi_1 Phi / r^3, pi_0 Phi / r^2, Phi_{l >= 2} / r^2).
class System {
 public:
  System(const InitialDataSet& ds, const Vec3& p, double r, std::shared_ptr<const SphereGrid> grid,
         const SolverOptions& opt, const Vec3& tau_fixed)
      : ds_(ds), p_(p), r_(r), grid_(std::move(grid)), opt_(opt), tau_fixed_(tau_fixed) {
    nt_ = opt.fix_tau ? 0 : 3;
    nphi_ = harmonic_count(opt.band_limit) - 4;
  }

  int size() const { return nt_ + 1 + nphi_; }

  Eigen::VectorXd pack(const Vec3& tau, double lambda, const HarmonicField& phi) const {
    Eigen::VectorXd u(size());
    if (nt_) u.head<3>() = tau;
    u[nt_] = lambda;
    HarmonicField ph = phi.resized(opt_.band_limit);
    u.tail(nphi_) = ph.coeffs.tail(nphi_);
    return u;
  }

  Vec3 tau(const Eigen::VectorXd& u) const { return nt_ ? Vec3(u.head<3>()) : tau_fixed_; }
  double lambda(const Eigen::VectorXd& u) const { return u[nt_]; }
  HarmonicField phi(const Eigen::VectorXd& u) const {
    HarmonicField f(opt_.band_limit);
    f.coeffs.tail(nphi_) = u.tail(nphi_);
    return f;
  }

  struct Eval {
    Eigen::VectorXd F;
    ResidualField residual;
    double pi0_abs = 0.0, pi1_norm = 0.0, perp_norm = 0.0;
    double projected() const { return pi0_abs + pi1_norm + perp_norm; }
  };

  Eval evaluate(const Eigen::VectorXd& u) const {
    HarmonicField graph = phi(u);
    graph.coeffs *= r_ * r_;
    Eval e;
    e.residual = rescaled_phi(ds_, p_, r_, tau(u), graph, lambda(u), grid_, opt_.geodesic);
    HarmonicField a = analyze(*grid_, e.residual.values, opt_.band_limit);
    const double r2 = r_ * r_, r3 = r2 * r_;
    e.F.resize(size());
    if (nt_) e.F.head<3>() = e.residual.pi1 / r3;
    e.F[nt_] = e.residual.pi0 / r2;
    e.F.tail(nphi_) = a.coeffs.tail(nphi_) / r2;
    e.pi0_abs = std::abs(e.residual.pi0);
    e.pi1_norm = nt_ ? e.residual.pi1.norm() : 0.0;
    e.perp_norm = a.coeffs.tail(nphi_).norm();
    return e;
  }

  Eigen::VectorXd steps(const Eigen::VectorXd& u) const {
    Eigen::VectorXd h(size());
    for (int i = 0; i < nt_; ++i) h[i] = opt_.step_tau;
    h[nt_] = opt_.step_lambda * std::max(1.0, std::abs(u[nt_]));
    for (int j = 0; j < nphi_; ++j) h[nt_ + 1 + j] = opt_.step_phi * std::max(1.0, std::abs(u[nt_ + 1 + j]));
    return h;
  }

  // Column scaling: the K-perp block is preconditioned by the inverse biharmonic symbol.
  Eigen::VectorXd preconditioner() const {
    Eigen::VectorXd d(size());
    for (int i = 0; i < nt_; ++i) d[i] = 1.0;
    d[nt_] = 1.0 / (8.0 * kPi);
    for (int l = 2, j = 0; l <= opt_.band_limit; ++l)
      for (int m = -l; m <= l; ++m, ++j) d[nt_ + 1 + j] = 1.0 / biharmonic_symbol(l);
    return d;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& u, const Eigen::VectorXd& F0) const {
    const Eigen::VectorXd h = steps(u);
    Eigen::MatrixXd J(size(), size());
    for (int c = 0; c < size(); ++c) {
      Eigen::VectorXd v = u;
      v[c] += h[c];
      J.col(c) = (evaluate(v).F - F0) / h[c];
    }
    return J;
  }

 private:
  const InitialDataSet& ds_;
  Vec3 p_;
  double r_;
  std::shared_ptr<const SphereGrid> grid_;
  SolverOptions opt_;
  Vec3 tau_fixed_;
  int nt_ = 3, nphi_ = 0;
};

}  // namespace

InitialGuess initial_guess(const InitialDataSet& ds, const Vec3& p, int band_limit) {
  if (band_limit < 4) throw Error(ErrorCode::InvalidParams, "phi0 needs band limit >= 4");
  const CurvatureAtPoint c = curvature_at(ds, p);
  const Mat3 E = orthonormal_frame(c.g);
  const Mat3 ric = E.transpose() * c.ricci * E;
  const Mat3 k = E.transpose() * c.k * E;
  InitialGuess out;
  out.lambda0 = -c.scalar / 3.0 - c.norm_k_sq / 15.0 - c.tr_k * c.tr_k / 5.0;
  // Degree-4 source times degree <= L harmonics is integrated exactly on this grid.
  const int nt = band_limit + 4;
  SphereGrid grid(nt, 2 * nt + 2, band_limit);
  NodeField w(grid.size());
  for (int q = 0; q < grid.size(); ++q) w[q] = phi0_source(ric, k, grid.nodes()[q]);
  HarmonicField rhs = project_Kperp(analyze(grid, w));
  out.phi0 = biharmonic_solve(rhs);
  rhs.coeffs = -rhs.coeffs;
  out.phi0_opposite = biharmonic_solve(rhs);
  return out;
}

NonexistenceDiagnosis nonexistence_check(const InitialDataSet& ds, const Vec3& p, double tol, double condition_max) {
  const ConcentrationScalar f = concentration_scalar(ds, p);
  const Mat3 E = orthonormal_frame(ds.metric(p));
  NonexistenceDiagnosis d;
  d.grad_f = E.transpose() * f.gradient;
  d.grad_norm = d.grad_f.norm();
  d.excluded = d.grad_norm > tol;
  Eigen::SelfAdjointEigenSolver<Mat3> es(E.transpose() * f.hessian * E);
  d.hessian_eigenvalues = es.eigenvalues();
  const double big = d.hessian_eigenvalues.cwiseAbs().maxCoeff();
  const double small = d.hessian_eigenvalues.cwiseAbs().minCoeff();
  d.hessian_condition = small > 0.0 ? big / small : std::numeric_limits<double>::infinity();
  d.hessian_degenerate = !(d.hessian_condition <= condition_max) || big < 1e-14;
  return d;
}

CriticalSurfaceSolution solve_critical(const InitialDataSet& ds, const Vec3& p, double r,
                                       std::shared_ptr<const SphereGrid> grid, const SolverState& guess,
                                       const SolverOptions& opt) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidParams, "radius must be positive");
  if (opt.band_limit < 2 || opt.band_limit > grid->band_limit())
    throw Error(ErrorCode::InvalidParams, "solver band limit outside [2, grid band limit]");
  if (opt.check_hessian && !opt.fix_tau) {
    auto d = nonexistence_check(ds, p, 1e-8, opt.hessian_condition_max);
    if (d.hessian_degenerate)
      throw Error(ErrorCode::DegenerateHessian,
                  "Hessian of the concentration scalar is degenerate (condition " + sci(d.hessian_condition) + ")");
  }
  System sys(ds, p, r, grid, opt, guess.tau);
  Eigen::VectorXd u = sys.pack(guess.tau, guess.lambda, guess.phi);
  const Eigen::VectorXd D = sys.preconditioner();

  CriticalSurfaceSolution sol;
  sol.r = r;
  sol.p = p;
  const double target = opt.tolerance_factor * r * r * r;
  sol.tolerance = std::max(target, opt.noise_floor);

  Eigen::MatrixXd J = guess.jacobian.rows() == sys.size() ? guess.jacobian : Eigen::MatrixXd();
  bool fresh = false;
  System::Eval cur = sys.evaluate(u);
  int iterations = 0;
  while (true) {
    if (cur.projected() <= sol.tolerance) break;
    if (iterations >= opt.max_iterations)
      throw Error(ErrorCode::NonConvergence, "Newton iteration limit reached; projected residual " +
                                                 sci(cur.projected()));
    if (J.size() == 0) {
      J = sys.jacobian(u, cur.F);
      ++sol.jacobian_evaluations;
      fresh = true;
    }
    Eigen::VectorXd y = (J * D.asDiagonal()).colPivHouseholderQr().solve(-cur.F);
    Eigen::VectorXd step = D.cwiseProduct(y);
    const double merit = cur.F.norm();
    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 6 && !accepted; ++ls, alpha *= 0.5) {
      Eigen::VectorXd trial = u + alpha * step;
      System::Eval e;
      try {
        e = sys.evaluate(trial);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::NonEmbedded && err.code() != ErrorCode::DegenerateInducedMetric) throw;
        continue;
      }
      if (e.F.norm() < (1.0 - 1e-4 * alpha) * merit) {
        // Slow contraction under a reused Jacobian: refresh it before the next step.
        if (!fresh && e.F.norm() > 0.5 * merit) J.resize(0, 0);
        u = trial;
        cur = std::move(e);
        accepted = true;
      }
    }
    if (accepted) {
      ++iterations;
      fresh = false;
      continue;
    }
    // No descent: either at the rounding floor or the Jacobian is stale.
    if (cur.projected() <= 10.0 * sol.tolerance) break;
    if (!fresh) {
      J.resize(0, 0);
      continue;
    }
    throw Error(ErrorCode::NonConvergence,
                "line search failed; projected residual " + sci(cur.projected()));
  }

  sol.tau = sys.tau(u);
  sol.lambda = sys.lambda(u);
  sol.phi = sys.phi(u);
  sol.residual = cur.residual;
  sol.pi0_abs = cur.pi0_abs;
  sol.pi1_norm = cur.residual.pi1.norm();
  sol.perp_norm = cur.perp_norm;
  sol.projected_residual = cur.projected();
  sol.converged_to_target = sol.projected_residual <= target;
  sol.newton_iterations = iterations;
  sol.jacobian = J;
  sol.energy = hawking_energy(solution_surface(ds, sol, grid, opt.geodesic));
  return sol;
}

CriticalSurfaceSolution solve_critical(const InitialDataSet& ds, const Vec3& p, double r,
                                       std::shared_ptr<const SphereGrid> grid, const SolverOptions& opt) {
  InitialGuess g = initial_guess(ds, p, std::max(opt.band_limit, 4));
  SolverState s;
  s.lambda = g.lambda0;
  s.phi = g.phi0.resized(opt.band_limit);
  return solve_critical(ds, p, r, std::move(grid), s, opt);
}

EmbeddedSurface solution_surface(const InitialDataSet& ds, const CriticalSurfaceSolution& s,
                                 std::shared_ptr<const SphereGrid> grid, const GeodesicOptions& opt) {
  HarmonicField graph = s.phi;
  graph.coeffs *= s.r * s.r;
  return graph_surface(ds, s.p, s.tau, s.r, graph, std::move(grid), opt);
}

NodeField lapse(const EmbeddedSurface& leaf, const Vec3& dtau_dr) {
  NodeField a(leaf.size());
  const Vec3 v = leaf.frame * dtau_dr;
  for (int q = 0; q < leaf.size(); ++q) a[q] = 1.0 + v.dot(leaf.ambient[q].g * leaf.nu[q]);
  return a;
}

namespace {

// Value at r = 0 of the polynomial in r through the (up to three) smallest-radius samples.
double extrapolate_to_zero(const std::vector<double>& r, const std::vector<double>& y) {
  const int n = std::min<int>(3, r.size());
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = std::pow(r[i], j);
    b[i] = y[i];
  }
  return A.fullPivLu().solve(b)[0];
}

}  // namespace

FoliationTrace foliate(const InitialDataSet& ds, const Vec3& p, double r_min, double r_max, int n_steps,
                       std::shared_ptr<const SphereGrid> grid, const SolverOptions& opt, FoliationTrace* partial,
                       const std::vector<CriticalSurfaceSolution>& resume) {
  if (!(r_min > 0.0) || !(r_max >= r_min) || n_steps < 1)
    throw Error(ErrorCode::InvalidParams, "need 0 < r_min <= r_max and n_steps >= 1");
  FoliationTrace t;
  const InitialGuess g0 = initial_guess(ds, p, std::max(opt.band_limit, 4));
  t.lambda0 = g0.lambda0;
  t.area_r4_expected = -2.0 * kPi / 9.0 * curvature_at(ds, p).scalar;

  std::vector<double> targets;
  for (int i = 0; i <= n_steps; ++i) targets.push_back(r_min * std::pow(r_max / r_min, double(i) / n_steps));
  if (r_max == r_min) targets.resize(1);

  t.leaves = resume;
  auto publish = [&]() {
    if (partial) *partial = t;
  };
  for (double target : targets) {
    if (!t.leaves.empty() && target <= t.leaves.back().r * (1.0 + 1e-12)) continue;
    double attempt = target;
    int halvings = 0;
    while (true) {
      SolverState guess;
      if (t.leaves.empty()) {
        guess.lambda = g0.lambda0;
        guess.phi = g0.phi0.resized(opt.band_limit);
      } else {
        const auto& last = t.leaves.back();
        guess.tau = last.tau;
        guess.lambda = last.lambda;
        guess.phi = last.phi;
        if (opt.reuse_jacobian) guess.jacobian = last.jacobian;
      }
      try {
        t.leaves.push_back(solve_critical(ds, p, attempt, grid, guess, opt));
        publish();
      } catch (const Error& e) {
        if (t.leaves.empty() || e.code() == ErrorCode::DegenerateHessian) throw;
        if (halvings == 2) {
          t.failure = e.what();
          publish();
          throw Error(ErrorCode::ContinuationBroken,
                      "continuation failed at r = " + std::to_string(attempt) + " after two step halvings: " + e.what());
        }
        attempt = std::sqrt(t.leaves.back().r * attempt);
        ++halvings;
        continue;
      }
      if (attempt >= target) break;
      attempt = target;
      halvings = 0;
    }
  }

  const int n = t.leaves.size();
  t.dtau_dr.assign(n, Vec3::Zero());
  for (int i = 0; i < n && n > 1; ++i) {
    const int a = std::max(0, i - 1), b = std::min(n - 1, i + 1);
    t.dtau_dr[i] = (t.leaves[b].tau - t.leaves[a].tau) / (t.leaves[b].r - t.leaves[a].r);
  }
  if (n > 1) {
    const double r0 = t.leaves[0].r, r1 = t.leaves[1].r;
    t.dtau_dr_at_zero = t.dtau_dr[0] - r0 * (t.dtau_dr[1] - t.dtau_dr[0]) / (r1 - r0);
  }

  std::vector<double> rs, lams;
  double max_excess = -std::numeric_limits<double>::infinity();
  Vec3 prev_center = Vec3::Zero();
  double prev_outer = 0.0;
  t.lapse_min.resize(n);
  Eigen::MatrixXd A(n, std::min(3, n));
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const auto& leaf = t.leaves[i];
    rs.push_back(leaf.r);
    lams.push_back(leaf.lambda);
    if (i > 0 && !(leaf.r > t.leaves[i - 1].r)) t.monotone_r = false;
    EmbeddedSurface s = solution_surface(ds, leaf, grid, opt.geodesic);
    t.lapse_min[i] = lapse(s, t.dtau_dr[i]).minCoeff();
    max_excess = std::max(max_excess, leaf.energy.hawking_functional - 4.0 * kPi);
    // Coordinate distances from the previous leaf's center.
    if (i > 0) {
      double inner = std::numeric_limits<double>::infinity();
      for (const Vec3& x : s.X) inner = std::min(inner, (x - prev_center).norm());
      if (!(inner > prev_outer)) t.nested = false;
    }
    prev_center = s.center;
    prev_outer = 0.0;
    for (const Vec3& x : s.X) prev_outer = std::max(prev_outer, (x - s.center).norm());
    for (int j = 0; j < A.cols(); ++j) A(i, j) = std::pow(leaf.r, 4 + j);
    b[i] = leaf.energy.area - 4.0 * kPi * leaf.r * leaf.r;
  }
  t.foliation_valid = n > 0 && std::all_of(t.lapse_min.begin(), t.lapse_min.end(), [](double a) { return a > 0.0; });
  t.lambda_at_zero = n > 0 ? extrapolate_to_zero(rs, lams) : 0.0;
  t.eps0_sq = n > 0 ? 10.0 * max_excess : 0.0;
  if (n > 0) t.area_r4_coefficient = A.colPivHouseholderQr().solve(b)[0];
  publish();
  return t;
}

void write_trace_csv(const FoliationTrace& t, std::ostream& os) {
  os << "r,tau_x,tau_y,tau_z,lambda,lapse_min,hawking_functional,hawking_energy,projected_residual,newton_iterations\n"
     << std::setprecision(17);
  for (std::size_t i = 0; i < t.leaves.size(); ++i) {
    const auto& l = t.leaves[i];
    os << l.r << ',' << l.tau[0] << ',' << l.tau[1] << ',' << l.tau[2] << ',' << l.lambda << ','
       << (i < t.lapse_min.size() ? t.lapse_min[i] : 0.0) << ',' << l.energy.hawking_functional << ','
       << l.energy.hawking_energy << ',' << l.projected_residual << ',' << l.newton_iterations << '\n';
  }
}

}  // namespace hawking
