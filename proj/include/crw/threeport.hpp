#pragma once

// T-shaped three-arm junctions: S = M^{-1} N for the two coupling graphs and
// the perfect-circulator design solvers.

#include <optional>
#include <vector>

#include "crw/core.hpp"

namespace crw {

struct ThreePortEffectiveParams {
  cplx coupling_ab;  // J_ab e^{i phi'}
  double j_ca = 0.0;
  double j_bc = 0.0;
  double delta_a = 0.0;
  double delta_b = 0.0;
  double delta_c = 0.0;
  double energy = 0.0;

  double j_ab() const { return std::abs(coupling_ab); }
  double phi_prime() const { return std::arg(coupling_ab); }
  double delta(Channel ch) const;
};

ThreePortEffectiveParams effective_three_port(double energy, const NodeSpec& node);

// xi'_l e^{ik'_l} = xi_l e^{ik_l} + Delta_l, reported as (modulus, argument).
struct RenormalizedChannel {
  double xi_prime;
  double k_prime;
};
RenormalizedChannel renormalized_channel(double xi, const ChannelStatus& status, double delta);

ScatteringResult smatrix_three_port(double incident_k, Channel incident, const NodeSpec& node,
                                    std::span<const ChannelSpec> channels);
ScatteringResult smatrix_three_port_at_energy(double energy, const NodeSpec& node,
                                              std::span<const ChannelSpec> channels);

// Dispatches on topology to the two- or three-port closed form.
ScatteringResult smatrix(double incident_k, Channel incident, const NodeSpec& node,
                         std::span<const ChannelSpec> channels);
ScatteringResult smatrix_at_energy(double energy, const NodeSpec& node,
                                   std::span<const ChannelSpec> channels);

enum class CirculationDirection {
  kClockwise,         // a -> b -> c -> a : I_ba = I_cb = I_ac = 1
  kCounterclockwise,  // a -> c -> b -> a : I_ca = I_bc = I_ab = 1
};

std::string_view to_string(CirculationDirection d);

// Classifies a three-port result as a perfect circulator; nullopt if the
// three target flows are not within tol of 1 or any other flow exceeds tol.
std::optional<CirculationDirection> circulation_from_flows(const ScatteringResult& r,
                                                           double tol = 1e-6);

struct CirculatorDesign {
  Topology topology = Topology::kCirculatorTwoModes;
  std::vector<CouplingEdge> couplings;
  double xi = 1.0;
  double xi_c = 1.0;
  double phi = 0.0;
  double k = 0.0;
  CirculationDirection direction = CirculationDirection::kClockwise;

  double coupling(Channel ch, Mode m) const;
  NodeSpec node() const;
  std::vector<ChannelSpec> channels() const;
};

// J_{c,2} and xi_c of the two-mode design for J_{a,1} = J_{b,1} = xi,
// J_{a,2} = J_{b,2} = j2 and zero detuning, evaluated at wavenumber k.
struct TwoModeDesignValues {
  double j_c2;
  double xi_c;
};
TwoModeDesignValues two_mode_design_values(double j2, double k, double xi = 1.0);

// Equal coupling J of the three-mode design at phase phi (xi_c = xi).
double equal_design_coupling(double phi, double xi = 1.0);

// Two-mode T junction with J_{a,1} = J_{b,1} = xi, J_{a,2} = J_{b,2} = j2,
// Delta = 0. phi must be pi/2 or 3pi/2 and k must be pi/4 or 3pi/4.
CirculatorDesign design_circulator_two_modes(double j2, double phi, double k, double xi = 1.0);

// Three-mode junction with equal couplings and xi_c = xi; returns the designs
// at k and pi - k. Throws kDegeneratePhase for phi = n pi.
std::vector<CirculatorDesign> design_circulator_three_modes_equal(double phi, double xi = 1.0);

// Three-mode junction at phi = pi/2 (or 3pi/2) with unequal couplings and
// xi_c != xi, tuned to circulate at k in (0, pi/4) u (3pi/4, pi).
CirculatorDesign design_circulator_three_modes_at_k(double k, double phi = kPi / 2,
                                                    double xi = 1.0);

// Root of 2cos^2 k - sin 2k = 4 sin^2 k in (0, pi/4), by bisection.
double symmetric_design_wavenumber();

}  // namespace crw
