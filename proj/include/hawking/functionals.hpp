#pragma once

#include "hawking/surface.hpp"

namespace hawking {

struct EnergyReport {
  double area = 0.0;
  double willmore = 0.0;            // (1/4) int H^2
  double hawking_functional = 0.0;  // (1/4) int (H^2 - P^2)
  double hawking_energy = 0.0;      // sqrt(|S|/16 pi) (1 - (1/16 pi) int (H^2 - P^2))
  double int_H2 = 0.0;
  double int_P2 = 0.0;
};

EnergyReport hawking_energy(const EmbeddedSurface& s);
double willmore(const EmbeddedSurface& s);

}  // namespace hawking
