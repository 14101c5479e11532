#include <fmt/format.h>

#include <Eigen/LU>

#include <limits>

#include "crw/oracle.hpp"

namespace crw {

BoundarySystem assemble_boundary_system(double energy, Channel incident, const NodeSpec& node,
                                        std::span<const ChannelSpec> channels,
                                        std::span<const ChannelStatus> statuses) {
  BoundarySystem sys;
  for (std::size_t i = 0; i < node.modes.size(); ++i) {
    const Mode m = mode_at(i);
    for (const auto& e : node.edges) {
      if (e.mode == m && e.strength != 0.0) {
        sys.modes.push_back(m);
        break;
      }
    }
  }
  const auto nc = static_cast<Eigen::Index>(channels.size());
  const auto dim = nc + static_cast<Eigen::Index>(sys.modes.size());
  sys.matrix = Eigen::MatrixXcd::Zero(dim, dim);
  sys.rhs = Eigen::VectorXcd::Zero(dim);

  // u_l(j) = delta_{l,in} z^{-j} + s_l z^j; the bulk rows hold identically.
  for (Eigen::Index l = 0; l < nc; ++l) {
    const cplx z = statuses[static_cast<std::size_t>(l)].phase_factor();
    const double xi = channels[static_cast<std::size_t>(l)].xi;
    sys.matrix(l, l) = energy + xi * z;
    if (channel_at(static_cast<std::size_t>(l)) == incident) sys.rhs(l) = -(energy + xi / z);
  }
  for (std::size_t r = 0; r < sys.modes.size(); ++r) {
    const Mode m = sys.modes[r];
    const auto row = nc + static_cast<Eigen::Index>(r);
    sys.matrix(row, row) = cplx(energy - node.mode_energy(m), node.mode(m).gamma);
    for (const auto& e : node.edges) {
      if (e.mode != m) continue;
      const auto l = static_cast<Eigen::Index>(index(e.channel));
      const cplx phase = std::polar(1.0, e.carries_phase ? node.phi : 0.0);
      sys.matrix(l, row) -= e.strength * std::conj(phase);
      sys.matrix(row, l) -= e.strength * phase;
      if (e.channel == incident) sys.rhs(row) += e.strength * phase;
    }
  }
  return sys;
}

ScatteringResult solve_boundary_system_at_energy(double energy, const NodeSpec& node,
                                                 std::span<const ChannelSpec> channels) {
  validate(node, channels);
  ScatteringResult r;
  r.channels.assign(channels.begin(), channels.end());
  r.energy = energy;
  r.statuses = statuses_at(energy, channels);
  reject_band_edges(r.statuses, channels);

  const auto n = static_cast<Eigen::Index>(channels.size());
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  r.amplitudes = Eigen::MatrixXcd::Constant(n, n, cplx(nan, nan));
  for (Eigen::Index in = 0; in < n; ++in) {
    if (!r.statuses[static_cast<std::size_t>(in)].is_open()) continue;
    const auto sys = assemble_boundary_system(energy, channel_at(static_cast<std::size_t>(in)),
                                              node, channels, r.statuses);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys.matrix);
    if (!(lu.rcond() > 1e-13))
      fail(ErrorCode::kSingularBoundarySystem,
           fmt::format("boundary system is singular at E={:.12g} (rcond {:.3g})", energy,
                       lu.rcond()));
    const Eigen::VectorXcd x = lu.solve(sys.rhs);
    r.amplitudes.col(in) = x.head(n);
  }
  fill_flows(r);
  return r;
}

ScatteringResult solve_boundary_system(double incident_k, Channel incident, const NodeSpec& node,
                                       std::span<const ChannelSpec> channels) {
  validate(node, channels);
  const double energy = incident_energy(incident_k, incident, channels);
  return solve_boundary_system_at_energy(energy, node, channels);
}

}  // namespace crw
