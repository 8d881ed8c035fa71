#include "hawking/functionals.hpp"

#include <cmath>
#include <numbers>

namespace hawking {

EnergyReport hawking_energy(const EmbeddedSurface& s) {
  const int n = s.size();
  NodeField h2(n), p2(n);
  for (int q = 0; q < n; ++q) {
    h2[q] = s.H[q] * s.H[q];
    p2[q] = s.P[q] * s.P[q];
  }
  constexpr double c = 16.0 * std::numbers::pi;
  EnergyReport rep;
  rep.area = s.area();
  rep.int_H2 = surface_integral(s, h2);
  rep.int_P2 = surface_integral(s, p2);
  rep.willmore = 0.25 * rep.int_H2;
  rep.hawking_functional = 0.25 * (rep.int_H2 - rep.int_P2);
  rep.hawking_energy = std::sqrt(rep.area / c) * (1.0 - (rep.int_H2 - rep.int_P2) / c);
  return rep;
}

double willmore(const EmbeddedSurface& s) { return hawking_energy(s).willmore; }

}  // namespace hawking
