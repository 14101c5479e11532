#include <fmt/format.h>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

#include "crw/oracle.hpp"

namespace crw {

namespace {

constexpr double kBandMargin = 0.1;
constexpr double kClearThreshold = 1e-3;
constexpr double kNormDriftLimit = 1e-9;

using SparseC = Eigen::SparseMatrix<cplx>;

// Velocity 2 xi sin k of the packet envelope (dE/dk).
double packet_speed(const ChannelStatus& st, double xi) {
  return 2.0 * xi * std::sin(st.wavenumber());
}

SparseC build_hamiltonian(int n_sites, const NodeSpec& node,
                          std::span<const ChannelSpec> channels) {
  const auto arms = static_cast<int>(channels.size());
  const int dim = arms * n_sites + static_cast<int>(node.modes.size());
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(2 * dim + 4 * node.edges.size()));
  for (int l = 0; l < arms; ++l) {
    const double xi = channels[static_cast<std::size_t>(l)].xi;
    for (int j = 0; j + 1 < n_sites; ++j) {
      t.emplace_back(l * n_sites + j, l * n_sites + j + 1, -xi);
      t.emplace_back(l * n_sites + j + 1, l * n_sites + j, -xi);
    }
  }
  for (std::size_t i = 0; i < node.modes.size(); ++i) {
    const int d = arms * n_sites + static_cast<int>(i);
    t.emplace_back(d, d, node.mode_energy(mode_at(i)));
  }
  for (const auto& e : node.edges) {
    const int site = static_cast<int>(index(e.channel)) * n_sites;
    const int d = arms * n_sites + static_cast<int>(index(e.mode));
    const cplx phase = std::polar(1.0, e.carries_phase ? node.phi : 0.0);
    t.emplace_back(site, d, e.strength * std::conj(phase));
    t.emplace_back(d, site, e.strength * phase);
  }
  SparseC h(dim, dim);
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

}  // namespace

LatticeScenario default_scenario(double carrier_k, Channel incident,
                                 std::span<const ChannelSpec> channels, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorCode::kUnsupportedScenario, "packet width must be > 0");
  const double energy = incident_energy(carrier_k, incident, channels);
  const double v_in = packet_speed(ChannelStatus::propagating(carrier_k),
                                   find_channel(channels, incident).xi);
  double ratio = 1.0;
  double xi_max = 0.0;
  for (const auto& ch : channels) {
    xi_max = std::max(xi_max, ch.xi);
    const auto st = channel_status_from_energy(energy, ch.xi);
    if (st.is_open()) ratio = std::max(ratio, packet_speed(st, ch.xi) / v_in);
  }
  LatticeScenario s;
  s.packet_width = sigma;
  s.packet_center = 5.0 * sigma;
  s.carrier_k = carrier_k;
  s.evolution_time = 11.0 * sigma / v_in;
  s.time_step = 0.02 / xi_max;
  s.sites_per_arm = static_cast<int>(std::ceil(std::max(20.0 * sigma, 10.0 * sigma * ratio + 3.0 * sigma)));
  return s;
}

WavepacketResult wavepacket_transmission(const LatticeScenario& sc, Channel incident,
                                         const NodeSpec& node,
                                         std::span<const ChannelSpec> channels) {
  validate(node, channels);
  for (const auto& m : node.modes)
    if (m.gamma != 0.0)
      fail(ErrorCode::kUnsupportedScenario,
           "damped modes are not supported in time domain; use the boundary solver");
  const double xi_in = find_channel(channels, incident).xi;
  const double energy = incident_energy(sc.carrier_k, incident, channels);
  if (std::abs(energy) >= 2.0 * xi_in * (1.0 - kBandMargin))
    fail(ErrorCode::kUnsupportedScenario,
         fmt::format("carrier k={:.6g} too close to the band edge for a packet", sc.carrier_k));
  const double sigma = sc.packet_width;
  const int n = sc.sites_per_arm;
  if (n < 2 || !(sigma > 0.0) || sc.packet_center + 4.0 * sigma > n || !(sc.time_step > 0.0) ||
      !(sc.evolution_time > 0.0))
    fail(ErrorCode::kUnsupportedScenario, "lattice too short for the packet or bad time grid");

  const SparseC h = build_hamiltonian(n, node, channels);
  const auto dim = h.rows();
  const int steps = static_cast<int>(std::ceil(sc.evolution_time / sc.time_step));
  const double dt = sc.evolution_time / steps;

  // R(z) = (1 + z/2 + z^2/12)/(1 - z/2 + z^2/12), z = -i H dt, split over the
  // conjugate roots r = 3 +- i sqrt(3) into two linear solves per step.
  const cplx roots[2] = {{3.0, std::sqrt(3.0)}, {3.0, -std::sqrt(3.0)}};
  SparseC eye(dim, dim);
  eye.setIdentity();
  Eigen::SparseLU<SparseC> solvers[2];
  SparseC explicit_part[2];
  for (int q = 0; q < 2; ++q) {
    const cplx c = cplx(0.0, dt) / roots[q];
    SparseC implicit_part = eye + c * h;
    explicit_part[q] = eye - c * h;
    solvers[q].analyzePattern(implicit_part);
    solvers[q].factorize(implicit_part);
    if (solvers[q].info() != Eigen::Success)
      fail(ErrorCode::kUnsupportedScenario, "time-step factorization failed");
  }

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  const auto off = static_cast<Eigen::Index>(index(incident)) * n;
  for (int j = 0; j < n; ++j) {
    const double x = (j - sc.packet_center) / sigma;
    psi(off + j) = std::exp(-0.25 * x * x) * std::polar(1.0, -sc.carrier_k * j);
  }
  psi /= psi.norm();

  WavepacketResult res;
  for (int s = 0; s < steps; ++s) {
    for (int q = 0; q < 2; ++q) psi = solvers[q].solve(explicit_part[q] * psi);
    const double drift = std::abs(psi.squaredNorm() - 1.0);
    res.norm_drift = std::max(res.norm_drift, drift);
    if (drift > kNormDriftLimit)
      fail(ErrorCode::kNormDrift, fmt::format("norm drift {:.3g} at step {}", drift, s));
  }
  res.steps = steps;

  const auto arms = static_cast<Eigen::Index>(channels.size());
  const int near_node = static_cast<int>(std::ceil(sigma));
  const int far_start = n - static_cast<int>(std::ceil(3.0 * sigma));
  res.flows = Eigen::VectorXd::Zero(arms);
  for (Eigen::Index l = 0; l < arms; ++l) {
    for (int j = 0; j < n; ++j) {
      const double p = std::norm(psi(l * n + j));
      res.flows(l) += p;
      if (j < near_node) res.node_population += p;
      if (j >= far_start) res.far_end_population += p;
    }
  }
  for (Eigen::Index d = arms * n; d < dim; ++d) res.node_population += std::norm(psi(d));
  if (res.node_population > kClearThreshold || res.far_end_population > kClearThreshold)
    fail(ErrorCode::kPacketNotCleared,
         fmt::format("packet not cleared: node population {:.3g}, far-end population {:.3g}",
                     res.node_population, res.far_end_population));
  return res;
}

}  // namespace crw
