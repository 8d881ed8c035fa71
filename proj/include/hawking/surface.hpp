#pragma once

#include "hawking/background.hpp"
#include "hawking/harmonics.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace hawking {

struct GeodesicOptions {
  int min_steps = 4;
  int max_steps = 4096;
  double rel_tol = 1e-13;  // step-doubling error relative to |v|
};

/// exp_base(v): geodesic shooting with fixed-step RK4, doubling the step count
/// until two successive counts agree. Returns the endpoint.
Vec3 exp_map(const InitialDataSet& ds, const Vec3& base, const Vec3& v, const GeodesicOptions& opt = {});

/// Endpoint displacement exp_base(v) - base, accurate even when |base| >> |v|.
Vec3 exp_displacement(const InitialDataSet& ds, const Vec3& base, const Vec3& v, const GeodesicOptions& opt = {});

/// Center c(tau) = exp_p(tau^i e_i) with the frame e_i of g(p) parallel transported to c.
struct CenterFrame {
  Vec3 p;
  Vec3 tau;
  Vec3 c;
  Mat3 E;  // columns e_i^tau
};

CenterFrame transported_frame(const InitialDataSet& ds, const Vec3& p, const Vec3& tau,
                              const GeodesicOptions& opt = {});

/// Discretized closed surface over the parameter sphere. Tangent derivatives
/// D_a are taken along the unit frame (e_theta, e_phi) of the parameter sphere,
/// so G is the induced metric in that frame and dmu = sqrt(det G) is the area
/// element relative to the round unit sphere.
struct EmbeddedSurface {
  std::shared_ptr<const SphereGrid> grid;
  Vec3 center = Vec3::Zero();  // c(tau)
  Vec3 p = Vec3::Zero();
  Vec3 tau = Vec3::Zero();
  Mat3 frame = Mat3::Identity();
  double r = 0.0;
  HarmonicField phi;

  std::vector<Vec3> displacement;  // X - center
  std::vector<Vec3> X;
  std::vector<std::array<Vec3, 2>> T;
  std::vector<Vec3> nu;
  std::vector<std::array<Vec3, 2>> d_nu;
  std::vector<Mat2> G, B;
  std::vector<double> H, traceless_B_sq, P, dmu;
  std::vector<AmbientPoint> ambient;

  int size() const { return static_cast<int>(X.size()); }
  double area() const;
};

/// Nodes exp_{c(tau)}(r (1 + phi(x)) x^i e_i^tau). The caller supplies the full radial factor phi.
EmbeddedSurface graph_surface(const InitialDataSet& ds, const Vec3& p, const Vec3& tau, double r,
                              const HarmonicField& phi, std::shared_ptr<const SphereGrid> grid,
                              const GeodesicOptions& opt = {});
/// Same with a precomputed center and frame.
EmbeddedSurface graph_surface(const InitialDataSet& ds, const CenterFrame& cf, double r, const HarmonicField& phi,
                              std::shared_ptr<const SphereGrid> grid, const GeodesicOptions& opt = {});
EmbeddedSurface geodesic_sphere(const InitialDataSet& ds, const Vec3& p, const Vec3& tau, double r,
                                std::shared_ptr<const SphereGrid> grid, const GeodesicOptions& opt = {});

/// Surface from explicit node displacements about a center (no shooting), e.g.
/// coordinate spheres around a chart singularity.
EmbeddedSurface surface_from_positions(const InitialDataSet& ds, const Vec3& center,
                                       const std::vector<Vec3>& displacement, std::shared_ptr<const SphereGrid> grid);

/// Tangents, normal, B, H, |B°|^2, P, dmu and ambient data from the node positions.
void fundamental_forms(const InitialDataSet& ds, EmbeddedSurface& s);

/// int_Sigma f dmu.
double surface_integral(const EmbeddedSurface& s, const NodeField& f);
double surface_integral(const EmbeddedSurface& s, const std::vector<double>& f);

/// CSV columns: node, x, y, z, H, P, dmu.
void write_surface_csv(const EmbeddedSurface& s, std::ostream& os);

}  // namespace hawking
