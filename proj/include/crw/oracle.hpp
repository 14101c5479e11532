#pragma once

// Independent reference backends: the raw node equations solved as a dense
// linear system, and real-time propagation of a Gaussian packet on a
// truncated lattice.

#include <Eigen/Dense>

#include <vector>

#include "crw/core.hpp"

namespace crw {

// Node rows and phonon rows with the plane-wave ansatz substituted. Unknowns
// are ordered (s_a, s_b[, s_c], u_d1, u_d2[, u_d3]); modes with no nonzero
// coupling are dropped since their amplitude is identically zero.
struct BoundarySystem {
  Eigen::MatrixXcd matrix;
  Eigen::VectorXcd rhs;
  std::vector<Mode> modes;  // mode order of the trailing unknowns
};

BoundarySystem assemble_boundary_system(double energy, Channel incident, const NodeSpec& node,
                                        std::span<const ChannelSpec> channels,
                                        std::span<const ChannelStatus> statuses);

// Same contract as the closed forms (every open incident column filled) but no
// pole at E = eps_i. Throws kSingularBoundarySystem on a true singularity.
ScatteringResult solve_boundary_system(double incident_k, Channel incident, const NodeSpec& node,
                                       std::span<const ChannelSpec> channels);
ScatteringResult solve_boundary_system_at_energy(double energy, const NodeSpec& node,
                                                 std::span<const ChannelSpec> channels);

struct LatticeScenario {
  int sites_per_arm = 400;
  double packet_center = 100.0;  // sites from the node, in the incident arm
  double packet_width = 20.0;    // sigma, sites
  double carrier_k = kPi / 4;
  double evolution_time = 0.0;
  double time_step = 0.02;
};

// Packet launched 5 sigma from the node and evolved until it sits ~6 sigma
// past the node; the arm length is grown until every outgoing packet stays
// 3 sigma clear of the far end.
LatticeScenario default_scenario(double carrier_k, Channel incident,
                                 std::span<const ChannelSpec> channels, double sigma = 20.0);

struct WavepacketResult {
  Eigen::VectorXd flows;        // probability per arm, channel order
  double norm_drift = 0.0;      // max |<psi|psi> - 1| over the run
  double node_population = 0.0;
  double far_end_population = 0.0;
  int steps = 0;
};

// Fourth-order Gauss-Legendre (diagonal Pade) stepping, exactly unitary up to
// round-off. gamma > 0 is rejected with kUnsupportedScenario.
WavepacketResult wavepacket_transmission(const LatticeScenario& scenario, Channel incident,
                                         const NodeSpec& node,
                                         std::span<const ChannelSpec> channels);

}  // namespace crw
