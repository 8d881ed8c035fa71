#pragma once

#include "hawking/surface.hpp"

#include <iosfwd>

namespace hawking {

/// Residual values over the parameter sphere; norms and kernel pairings use
/// the round-sphere quadrature.
struct ResidualField {
  NodeField values;
  double lambda = 0.0;
  double l2 = 0.0;
  double c0 = 0.0;
  double pi0 = 0.0;
  Vec3 pi1 = Vec3::Zero();
};

ResidualField make_residual(const SphereGrid& grid, NodeField values, double lambda);

/// Divergence-form Laplace-Beltrami operator of the induced metric.
NodeField laplace_beltrami(const EmbeddedSurface& s, const NodeField& u);

/// The k-independent part {lambda H, Delta H, H |B°|^2, H Ric(nu, nu)} and the four k-terms.
struct ResidualParts {
  NodeField w1, w2;
};
ResidualParts el_parts(const EmbeddedSurface& s, double lambda);

/// Area-constrained Euler-Lagrange residual of the Hawking functional on s.
ResidualField el_residual(const EmbeddedSurface& s, double lambda);

/// Surface S_phi in the rescaled data (r^-2 g, r^-1 k) pulled back about c(tau).
EmbeddedSurface rescaled_surface(const InitialDataSet& ds, const Vec3& p, double r, const Vec3& tau,
                                 const HarmonicField& phi, std::shared_ptr<const SphereGrid> grid,
                                 const GeodesicOptions& opt = {});

/// Phi(r, tau, phi, lambda) on the rescaled data (lambda enters as r^2 lambda).
ResidualField rescaled_phi(const InitialDataSet& ds, const Vec3& p, double r, const Vec3& tau,
                           const HarmonicField& phi, double lambda, std::shared_ptr<const SphereGrid> grid,
                           const GeodesicOptions& opt = {});

/// (W1, W2) with W1 + W2 = Phi.
std::pair<ResidualField, ResidualField> w_split(const InitialDataSet& ds, const Vec3& p, double r, const Vec3& tau,
                                                const HarmonicField& phi, double lambda,
                                                std::shared_ptr<const SphereGrid> grid,
                                                const GeodesicOptions& opt = {});

/// CSV columns: node, x, y, z, residual.
void write_residual_csv(const SphereGrid& grid, const ResidualField& f, std::ostream& os);

}  // namespace hawking
