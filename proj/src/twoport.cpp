#include "crw/twoport.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>


namespace crw {

namespace {

cplx mode_denominator(const NodeSpec& node, Mode m, double energy) {
  const auto& spec = node.mode(m);
  const double detuned = energy - node.mode_energy(m);
  if (spec.gamma == 0.0 && std::abs(detuned) <= kPoleTolerance) {
    fail(ErrorCode::kPoleAtMechanicalResonance,
         fmt::format("E={:.12g} sits on the resonance of undamped mode {}; use the boundary "
                     "solver for this energy",
                     energy, to_string(m)));
  }
  return {detuned, spec.gamma};
}

bool mode_is_coupled(const NodeSpec& node, Mode m) {
  for (const auto& e : node.edges)
    if (e.mode == m && e.strength != 0.0) return true;
  return false;
}

}  // namespace

TwoPortEffectiveParams effective_two_port(double energy, const NodeSpec& node) {
  if (node.topology != Topology::kTwoPort)
    fail(ErrorCode::kInvalidSpec, "effective_two_port requires a two-port node");

  const double ja1 = node.coupling(Channel::a, Mode::d1);
  const double jb1 = node.coupling(Channel::b, Mode::d1);
  const double ja2 = node.coupling(Channel::a, Mode::d2);
  const double jb2 = node.coupling(Channel::b, Mode::d2);
  const cplx phase = std::polar(1.0, node.phi);

  // An uncoupled mode drops out; its resonance is not a pole.
  cplx inv1 = 0.0, inv2 = 0.0;
  if (mode_is_coupled(node, Mode::d1)) inv1 = 1.0 / mode_denominator(node, Mode::d1, energy);
  if (mode_is_coupled(node, Mode::d2)) inv2 = 1.0 / mode_denominator(node, Mode::d2, energy);

  TwoPortEffectiveParams p;
  p.energy = energy;
  p.j_ab = ja1 * jb1 * phase * inv1 + ja2 * jb2 * inv2;
  p.j_ba = ja1 * jb1 * std::conj(phase) * inv1 + ja2 * jb2 * inv2;
  p.delta_a = ja1 * ja1 * inv1 + ja2 * ja2 * inv2;
  p.delta_b = jb1 * jb1 * inv1 + jb2 * jb2 * inv2;
  return p;
}

ScatteringResult smatrix_two_port_at_energy(double energy, const NodeSpec& node,
                                            std::span<const ChannelSpec> channels) {
  validate(node, channels);
  ScatteringResult r;
  r.channels.assign(channels.begin(), channels.end());
  r.energy = energy;
  r.statuses = statuses_at(energy, channels);
  reject_band_edges(r.statuses, channels);

  const auto eff = effective_two_port(energy, node);
  const double xa = channels[0].xi;
  const double xb = channels[1].xi;
  const cplx za = r.statuses[0].phase_factor();
  const cplx zb = r.statuses[1].phase_factor();

  const cplx a_out = xa * za + eff.delta_a;  // xi_a e^{ik_a} + Delta_a
  const cplx a_in = xa / za + eff.delta_a;   // xi_a e^{-ik_a} + Delta_a
  const cplx b_out = xb * zb + eff.delta_b;
  const cplx b_in = xb / zb + eff.delta_b;
  const cplx jj = eff.j_ab * eff.j_ba;
  const cplx d = a_in * b_in - jj;

  const double scale = std::max({std::abs(a_in), std::abs(b_in), std::abs(eff.j_ab),
                                 std::abs(eff.j_ba)});
  if (std::abs(d) < 1e-12 * scale * scale)
    fail(ErrorCode::kSingularNodeMatrix,
         fmt::format("two-port node determinant vanishes at E={:.12g}", energy));

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  r.amplitudes = Eigen::MatrixXcd::Constant(2, 2, cplx(nan, nan));
  // 2i xi sin k written as xi (z - 1/z) so it stays valid for a decaying root.
  if (r.statuses[0].is_open()) {
    r.amplitudes(0, 0) = (jj - a_out * b_in) / d;
    r.amplitudes(1, 0) = eff.j_ba * xa * (za - 1.0 / za) / d;
  }
  if (r.statuses[1].is_open()) {
    r.amplitudes(0, 1) = eff.j_ab * xb * (zb - 1.0 / zb) / d;
    r.amplitudes(1, 1) = (jj - a_in * b_out) / d;
  }
  fill_flows(r);
  return r;
}

ScatteringResult smatrix_two_port(double incident_k, Channel incident, const NodeSpec& node,
                                  std::span<const ChannelSpec> channels) {
  validate(node, channels);
  const double energy = incident_energy(incident_k, incident, channels);
  return smatrix_two_port_at_energy(energy, node, channels);
}

double optimal_damping(double j2, double xi) {
  if (!(xi > 0.0) || !(j2 >= 0.0)) fail(ErrorCode::kDomain, "optimal_damping needs J2 >= 0, xi > 0");
  const double r = j2 / xi;
  return xi * std::sqrt(2.0 * r * r * r * r + 2.0);
}

std::string_view to_string(ConversionDirection d) {
  return d == ConversionDirection::kAToB ? "a->b dominant, b->a suppressed"
                                         : "b->a dominant, a->b suppressed";
}

std::vector<ConverterPoint> optimal_converter_points() {
  using D = ConversionDirection;
  return {{kPi / 2, kPi / 4, D::kBToA},
          {kPi / 2, 3 * kPi / 4, D::kAToB},
          {3 * kPi / 2, kPi / 4, D::kAToB},
          {3 * kPi / 2, 3 * kPi / 4, D::kBToA}};
}

}  // namespace crw
