#pragma once

#include "hawking/el_operator.hpp"
#include "hawking/functionals.hpp"

#include <iosfwd>

namespace hawking {

/// Leading-order data at p: lambda_0 and the K-perp profile phi_0.
struct InitialGuess {
  double lambda0 = 0.0;
  HarmonicField phi0;  // limit of the solved phi(r): Phi_phi phi0 = -pi_perp(Phi / r^2 at phi = 0)
  // -Delta(-Delta - 2) psi = pi_perp(9 (k(x,x))^2 - (4 Ric + 6 tr k k + 4 k k)(x,x)). Since
  // Phi_phi = Delta(-Delta - 2) for outward graphs, psi = -phi0.
  HarmonicField phi0_opposite;
};

InitialGuess initial_guess(const InitialDataSet& ds, const Vec3& p, int band_limit = 8);

struct SolverOptions {
  int band_limit = 8;            // L_solve
  int max_iterations = 30;
  double tolerance_factor = 1e-9;  // target: projected residual < tolerance_factor * r^3
  double noise_floor = 5e-12;      // rounding floor of the projected residual at unit scale
  double hessian_condition_max = 1e8;
  bool check_hessian = true;
  bool fix_tau = false;          // keep tau fixed and drop the pi_1 rows
  double step_tau = 1e-3;
  double step_lambda = 1e-4;
  double step_phi = 1e-4;
  bool reuse_jacobian = false;   // chord steps across a continuation (faster, not resume-exact)
  GeodesicOptions geodesic;
};

/// Starting point and (optionally) a Jacobian of the scaled system to reuse.
struct SolverState {
  Vec3 tau = Vec3::Zero();
  double lambda = 0.0;
  HarmonicField phi;  // degrees 2..L_solve; l = 0, 1 coefficients are ignored
  Eigen::MatrixXd jacobian;
};

struct CriticalSurfaceSolution {
  double r = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 tau = Vec3::Zero();
  double lambda = 0.0;
  HarmonicField phi;       // graph is r (1 + r^2 phi) over the geodesic sphere
  ResidualField residual;  // rescaled Phi at the solution
  double pi0_abs = 0.0, pi1_norm = 0.0, perp_norm = 0.0;  // projected residual parts
  double projected_residual = 0.0;
  double tolerance = 0.0;
  bool converged_to_target = false;  // below tolerance_factor * r^3
  int newton_iterations = 0;
  int jacobian_evaluations = 0;
  EnergyReport energy;
  Eigen::MatrixXd jacobian;  // last scaled Jacobian, for reuse along a continuation
};

/// Newton iteration for Phi(r, tau, r^2 phi, lambda) = 0 on (tau, lambda, phi in K-perp).
CriticalSurfaceSolution solve_critical(const InitialDataSet& ds, const Vec3& p, double r,
                                       std::shared_ptr<const SphereGrid> grid, const SolverState& guess,
                                       const SolverOptions& opt = {});
CriticalSurfaceSolution solve_critical(const InitialDataSet& ds, const Vec3& p, double r,
                                       std::shared_ptr<const SphereGrid> grid, const SolverOptions& opt = {});

/// Physical leaf exp_{c(tau)}(r x (1 + r^2 phi)).
EmbeddedSurface solution_surface(const InitialDataSet& ds, const CriticalSurfaceSolution& s,
                                 std::shared_ptr<const SphereGrid> grid, const GeodesicOptions& opt = {});

struct FoliationTrace {
  std::vector<CriticalSurfaceSolution> leaves;  // increasing r
  std::vector<Vec3> dtau_dr;
  std::vector<double> lapse_min;
  Vec3 dtau_dr_at_zero = Vec3::Zero();
  double lambda_at_zero = 0.0;  // Richardson over the three smallest radii
  double lambda0 = 0.0;         // closed form at p
  bool monotone_r = true;
  bool nested = true;            // each leaf lies outside the previous one
  bool foliation_valid = false;  // all lapse_min > 0
  double eps0_sq = 0.0;          // 10 max(H(S_r) - 4 pi), an engineering choice
  double area_r4_coefficient = 0.0;  // fitted from |S_r| = 4 pi r^2 + a r^4
  double area_r4_expected = 0.0;     // -(2 pi / 9) Sc(p)
  std::string failure;               // set when continuation stopped early
};

/// Continuation over geometric radii r_min..r_max. Throws ContinuationBroken after
/// two step halvings; `partial` (if given) receives the leaves solved so far.
FoliationTrace foliate(const InitialDataSet& ds, const Vec3& p, double r_min, double r_max, int n_steps,
                       std::shared_ptr<const SphereGrid> grid, const SolverOptions& opt = {},
                       FoliationTrace* partial = nullptr, const std::vector<CriticalSurfaceSolution>& resume = {});

/// Lapse 1 + (dtau^k/dr) g(e_k, nu) at the nodes of the physical leaf.
NodeField lapse(const EmbeddedSurface& leaf, const Vec3& dtau_dr);

struct NonexistenceDiagnosis {
  Vec3 grad_f = Vec3::Zero();  // frame components at p
  double grad_norm = 0.0;
  bool excluded = false;       // grad f != 0: no concentration at p
  Vec3 hessian_eigenvalues = Vec3::Zero();
  double hessian_condition = 0.0;
  bool hessian_degenerate = false;
};

NonexistenceDiagnosis nonexistence_check(const InitialDataSet& ds, const Vec3& p, double tol = 1e-8,
                                         double condition_max = 1e8);

/// CSV rows: r, tau, lambda, lapse_min, Hawking functional and energy per leaf.
void write_trace_csv(const FoliationTrace& t, std::ostream& os);

}  // namespace hawking
