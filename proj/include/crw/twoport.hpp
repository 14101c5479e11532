#pragma once

// Two semi-infinite arms joined through two mechanical modes: closed-form
// scattering amplitudes and the converter design conditions.

#include <vector>

#include "crw/core.hpp"

namespace crw {

struct TwoPortEffectiveParams {
  cplx j_ab;     // carries e^{+i phi}
  cplx j_ba;     // carries e^{-i phi}
  cplx delta_a;  // frequency shift of a_0
  cplx delta_b;
  double energy = 0.0;
};

// Effective node parameters after eliminating the mode amplitudes. Every mode
// enters as 1/(E - eps_i + i gamma_i). Throws kPoleAtMechanicalResonance when
// an undamped, coupled mode satisfies |E - eps_i| <= kPoleTolerance.
TwoPortEffectiveParams effective_two_port(double energy, const NodeSpec& node);

// Closed-form S-matrix and flows. The energy is fixed by incident_k in the
// incident arm; the partner arm may be evanescent.
ScatteringResult smatrix_two_port(double incident_k, Channel incident, const NodeSpec& node,
                                  std::span<const ChannelSpec> channels);

// Same, at a given energy (all open columns filled).
ScatteringResult smatrix_two_port_at_energy(double energy, const NodeSpec& node,
                                            std::span<const ChannelSpec> channels);

// gamma = xi * sqrt(2 (J2/xi)^4 + 2), the damping giving the strongest isolation
// for symmetric couplings with J1 = xi.
double optimal_damping(double j2, double xi = 1.0);

enum class ConversionDirection {
  kAToB,  // I_ba dominant, reverse flow I_ab suppressed
  kBToA,  // I_ab dominant, I_ba suppressed
};

std::string_view to_string(ConversionDirection d);

struct ConverterPoint {
  double phi;
  double k;
  ConversionDirection dominant;
};

// The four (phi, k) operating points {pi/2, 3pi/2} x {pi/4, 3pi/4}.
std::vector<ConverterPoint> optimal_converter_points();

}  // namespace crw
