#pragma once

#include <cmath>
#include <random>

#include "crw/core.hpp"
#include "crw/threeport.hpp"
#include "crw/twoport.hpp"

namespace fixtures {

inline const double kSqrt2 = std::sqrt(2.0);

// Converter with J_1 = xi, J_2 = 4 xi and gamma_2 at its optimum.
inline crw::NodeSpec converter(double phi, double delta1 = 0.0, double j2 = 4.0) {
  crw::TwoPortParams p;
  p.j_a2 = p.j_b2 = j2;
  p.gamma2 = crw::optimal_damping(j2);
  p.delta1 = delta1;
  p.phi = phi;
  return crw::make_node(p);
}

inline crw::CirculatorDesign circulator_one(double phi = crw::kPi / 2, double k = crw::kPi / 4) {
  return crw::design_circulator_two_modes(1.2, phi, k);
}

inline crw::CirculatorDesign circulator_two_equal(double phi, bool mirror = false) {
  return crw::design_circulator_three_modes_equal(phi).at(mirror ? 1 : 0);
}

inline double flow(const crw::ScatteringResult& r, char out, char in) {
  return r.flow(*crw::parse_channel(std::string(1, out)), *crw::parse_channel(std::string(1, in)));
}

}  // namespace fixtures
