#include "crw/threeport.hpp"

#include <fmt/format.h>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "crw/twoport.hpp"

namespace crw {

namespace {

constexpr double kDesignTolerance = 1e-9;
constexpr double kClosureTolerance = 1e-10;
constexpr double kSingularRcond = 1e-12;

bool mode_is_coupled(const NodeSpec& node, Mode m) {
  return std::any_of(node.edges.begin(), node.edges.end(),
                     [&](const CouplingEdge& e) { return e.mode == m && e.strength != 0.0; });
}

// 1/(E - eps_i + i gamma_i) for every mode; zero for uncoupled modes.
std::vector<cplx> mode_propagators(const NodeSpec& node, double energy) {
  std::vector<cplx> inv(node.modes.size(), 0.0);
  for (std::size_t i = 0; i < node.modes.size(); ++i) {
    const Mode m = mode_at(i);
    if (!mode_is_coupled(node, m)) continue;
    const double detuned = energy - node.mode_energy(m);
    if (node.modes[i].gamma == 0.0 && std::abs(detuned) <= kPoleTolerance)
      fail(ErrorCode::kPoleAtMechanicalResonance,
           fmt::format("E={:.12g} sits on the resonance of undamped mode {}; use the boundary "
                       "solver for this energy",
                       energy, to_string(m)));
    inv[i] = 1.0 / cplx(detuned, node.modes[i].gamma);
  }
  return inv;
}

// G_{ll'} = sum_i J_{l,i} J_{l',i} e^{-i theta_{l,i}} e^{i theta_{l',i}} / (E - eps_i + i gamma_i).
Eigen::Matrix3cd node_couplings(const NodeSpec& node, double energy) {
  const auto inv = mode_propagators(node, energy);
  Eigen::Matrix3cd g = Eigen::Matrix3cd::Zero();
  for (const auto& e1 : node.edges) {
    for (const auto& e2 : node.edges) {
      if (e1.mode != e2.mode) continue;
      const double t1 = e1.carries_phase ? node.phi : 0.0;
      const double t2 = e2.carries_phase ? node.phi : 0.0;
      g(index(e1.channel), index(e2.channel)) +=
          e1.strength * e2.strength * std::polar(1.0, t2 - t1) * inv[index(e1.mode)];
    }
  }
  return g;
}

bool near(double x, double target) { return std::abs(x - target) <= kDesignTolerance; }

CirculatorDesign finish_design(CirculatorDesign d) {
  const auto node = d.node();
  const auto channels = d.channels();
  const auto r = smatrix_three_port(d.k, Channel::a, node, channels);
  const auto dir = circulation_from_flows(r, kClosureTolerance);
  if (!dir)
    fail(ErrorCode::kInvalidDesignPoint,
         fmt::format("design at phi={:.12g}, k={:.12g} does not circulate (residual {:.3g})",
                     d.phi, d.k, r.conservation_residual()));
  d.direction = *dir;
  return d;
}

}  // namespace

double ThreePortEffectiveParams::delta(Channel ch) const {
  switch (ch) {
    case Channel::a: return delta_a;
    case Channel::b: return delta_b;
    case Channel::c: return delta_c;
  }
  return 0.0;
}

ThreePortEffectiveParams effective_three_port(double energy, const NodeSpec& node) {
  if (node.topology == Topology::kTwoPort)
    fail(ErrorCode::kInvalidSpec, "effective_three_port requires a circulator node");
  const auto g = node_couplings(node, energy);
  ThreePortEffectiveParams p;
  p.energy = energy;
  p.coupling_ab = g(0, 1);
  p.j_ca = g(2, 0).real();
  p.j_bc = g(1, 2).real();
  p.delta_a = g(0, 0).real();
  p.delta_b = g(1, 1).real();
  p.delta_c = g(2, 2).real();
  return p;
}

RenormalizedChannel renormalized_channel(double xi, const ChannelStatus& status, double delta) {
  const cplx w = xi * status.phase_factor() + delta;
  return {std::abs(w), std::arg(w)};
}

ScatteringResult smatrix_three_port_at_energy(double energy, const NodeSpec& node,
                                              std::span<const ChannelSpec> channels) {
  validate(node, channels);
  if (node.topology == Topology::kTwoPort)
    fail(ErrorCode::kInvalidSpec, "smatrix_three_port requires a circulator node");
  ScatteringResult r;
  r.channels.assign(channels.begin(), channels.end());
  r.energy = energy;
  r.statuses = statuses_at(energy, channels);
  reject_band_edges(r.statuses, channels);

  const Eigen::Matrix3cd g = node_couplings(node, energy);
  Eigen::Matrix3cd m = g;
  Eigen::Matrix3cd n = -g;
  for (int l = 0; l < 3; ++l) {
    // For a propagating arm 1/z = conj(z); for a closed arm the decaying root is used as is.
    const cplx z = r.statuses[static_cast<std::size_t>(l)].phase_factor();
    const double xi = channels[static_cast<std::size_t>(l)].xi;
    m(l, l) += xi / z;
    n(l, l) -= xi * z;
  }

  // Reciprocal condition number rather than |det M| / |M|^3: near a mechanical
  // resonance M gains a rank-one part of size 1/(E - eps_i), which drives the
  // determinant ratio to zero although S stays regular.
  Eigen::PartialPivLU<Eigen::Matrix3cd> lu(m);
  if (!(lu.rcond() > kSingularRcond))
    fail(ErrorCode::kSingularNodeMatrix,
         fmt::format("node matrix M is singular at E={:.12g} (rcond {:.3g})", energy, lu.rcond()));

  r.amplitudes = lu.solve(n);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (int l = 0; l < 3; ++l)
    if (!r.statuses[static_cast<std::size_t>(l)].is_open())
      r.amplitudes.col(l).setConstant(cplx(nan, nan));
  fill_flows(r);
  return r;
}

ScatteringResult smatrix_three_port(double incident_k, Channel incident, const NodeSpec& node,
                                    std::span<const ChannelSpec> channels) {
  validate(node, channels);
  const double energy = incident_energy(incident_k, incident, channels);
  return smatrix_three_port_at_energy(energy, node, channels);
}

ScatteringResult smatrix(double incident_k, Channel incident, const NodeSpec& node,
                         std::span<const ChannelSpec> channels) {
  if (node.topology == Topology::kTwoPort)
    return smatrix_two_port(incident_k, incident, node, channels);
  return smatrix_three_port(incident_k, incident, node, channels);
}

ScatteringResult smatrix_at_energy(double energy, const NodeSpec& node,
                                   std::span<const ChannelSpec> channels) {
  if (node.topology == Topology::kTwoPort)
    return smatrix_two_port_at_energy(energy, node, channels);
  return smatrix_three_port_at_energy(energy, node, channels);
}

std::string_view to_string(CirculationDirection d) {
  return d == CirculationDirection::kClockwise ? "clockwise (a->b->c->a)"
                                               : "counterclockwise (a->c->b->a)";
}

std::optional<CirculationDirection> circulation_from_flows(const ScatteringResult& r,
                                                           double tol) {
  if (r.size() != 3) return std::nullopt;
  for (const auto& s : r.statuses)
    if (!s.is_open()) return std::nullopt;

  auto matches = [&](std::initializer_list<std::pair<Channel, Channel>> targets) {
    for (std::size_t out = 0; out < 3; ++out) {
      for (std::size_t in = 0; in < 3; ++in) {
        const bool is_target =
            std::any_of(targets.begin(), targets.end(), [&](const auto& t) {
              return index(t.first) == out && index(t.second) == in;
            });
        const double f = r.flows(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
        if (is_target ? std::abs(f - 1.0) > tol : f > tol) return false;
      }
    }
    return true;
  };
  using C = Channel;
  // (out, in) pairs.
  if (matches({{C::b, C::a}, {C::c, C::b}, {C::a, C::c}})) return CirculationDirection::kClockwise;
  if (matches({{C::c, C::a}, {C::b, C::c}, {C::a, C::b}}))
    return CirculationDirection::kCounterclockwise;
  return std::nullopt;
}

double CirculatorDesign::coupling(Channel ch, Mode m) const {
  for (const auto& e : couplings)
    if (e.channel == ch && e.mode == m) return e.strength;
  return 0.0;
}

NodeSpec CirculatorDesign::node() const {
  NodeSpec n;
  n.topology = topology;
  n.modes.clear();
  for (std::size_t i = 0; i < mode_count(topology); ++i) n.modes.push_back({mode_at(i), 0.0, 0.0});
  n.edges = couplings;
  n.phi = phi;
  return n;
}

std::vector<ChannelSpec> CirculatorDesign::channels() const { return make_channels(xi, xi, xi_c); }

TwoModeDesignValues two_mode_design_values(double j2, double k, double xi) {
  const double r = j2 / xi;
  const double jc2 = xi * std::sqrt(r * r * r * r + 1.0);
  const double energy = dispersion_energy(k, xi);
  const double delta_a = (xi * xi + j2 * j2) / energy;
  const double delta_c = jc2 * jc2 / energy;
  const double j_bc = j2 * jc2 / energy;
  return {jc2, std::abs(j_bc * j_bc / (xi * std::polar(1.0, -k) + delta_a) - delta_c)};
}

double equal_design_coupling(double phi, double xi) {
  const double c = std::cos(phi);
  return xi * std::sqrt(2.0 * (2.0 - c) / (5.0 - 4.0 * c));
}

CirculatorDesign design_circulator_two_modes(double j2, double phi, double k, double xi) {
  if (!(xi > 0.0) || !(j2 > 0.0))
    fail(ErrorCode::kInvalidDesignPoint, "two-mode circulator design needs J2 > 0 and xi > 0");
  if (!near(phi, kPi / 2) && !near(phi, 3 * kPi / 2))
    fail(ErrorCode::kInvalidDesignPoint,
         fmt::format("phi={:.12g} is not a design phase (pi/2 or 3pi/2)", phi));
  if (!near(k, kPi / 4) && !near(k, 3 * kPi / 4))
    fail(ErrorCode::kInvalidDesignPoint,
         fmt::format("k={:.12g} is not a design wavenumber (pi/4 or 3pi/4)", k));

  const auto [jc2, xi_c] = two_mode_design_values(j2, k, xi);

  CirculatorDesign d;
  d.topology = Topology::kCirculatorTwoModes;
  d.couplings = make_node(CirculatorTwoModesParams{xi, xi, j2, j2, jc2, 0.0, 0.0, phi}).edges;
  d.xi = xi;
  d.xi_c = xi_c;
  d.phi = phi;
  d.k = k;
  return finish_design(d);
}

std::vector<CirculatorDesign> design_circulator_three_modes_equal(double phi, double xi) {
  if (!(xi > 0.0)) fail(ErrorCode::kInvalidDesignPoint, "xi must be > 0");
  if (!std::isfinite(phi) || std::abs(std::sin(phi)) < kDesignTolerance)
    fail(ErrorCode::kDegeneratePhase,
         fmt::format("phi={:.12g} is a multiple of pi; the design wavenumber degenerates", phi));
  const double c = std::cos(phi);
  const double j = equal_design_coupling(phi, xi);
  const double k = 0.5 * std::asin(std::abs((4.0 * std::sin(phi) - std::sin(2.0 * phi)) /
                                            (5.0 - 4.0 * c)));
  const auto node = make_node(CirculatorThreeModesParams{j, j, j, j, j, j, 0, 0, 0, phi});
  std::vector<CirculatorDesign> out;
  for (double kk : {k, kPi - k}) {
    CirculatorDesign d;
    d.topology = Topology::kCirculatorThreeModes;
    d.couplings = node.edges;
    d.xi = xi;
    d.xi_c = xi;
    d.phi = node.phi;
    d.k = kk;
    out.push_back(finish_design(d));
  }
  return out;
}

CirculatorDesign design_circulator_three_modes_at_k(double k, double phi, double xi) {
  if (!(xi > 0.0)) fail(ErrorCode::kInvalidDesignPoint, "xi must be > 0");
  if (!near(phi, kPi / 2) && !near(phi, 3 * kPi / 2))
    fail(ErrorCode::kInvalidDesignPoint,
         fmt::format("phi={:.12g} is not a design phase (pi/2 or 3pi/2)", phi));
  if (!std::isfinite(k) || k <= 0.0 || k >= kPi)
    fail(ErrorCode::kKOutOfDesignRange, fmt::format("k out of design range: {:.12g}", k));
  if (k >= kPi / 4 && k <= 3 * kPi / 4)
    fail(ErrorCode::kKOutOfDesignRange,
         fmt::format("k out of design range: {:.12g} lies in [pi/4, 3pi/4]", k));

  const double s2 = std::abs(std::sin(2.0 * k));
  const double ck = std::abs(std::cos(k));
  const double radicand = 2.0 * ck * ck - s2;
  if (radicand < 0.0)
    fail(ErrorCode::kNegativeRadicand,
         fmt::format("2cos^2k - |sin 2k| = {:.3g} < 0 at k={:.12g}", radicand, k));
  const double j1 = xi * std::sqrt(s2);
  const double j2 = xi * std::sqrt(radicand);
  const double j3 = xi * ck;
  const double xi_c = xi * std::abs(ck / std::cos(std::atan(radicand / (4.0 * ck * std::sin(k)))));

  CirculatorDesign d;
  d.topology = Topology::kCirculatorThreeModes;
  d.couplings = make_node(CirculatorThreeModesParams{j1, j1, j2, j3, j2, j3, 0, 0, 0, phi}).edges;
  d.xi = xi;
  d.xi_c = xi_c;
  d.phi = phi;
  d.k = k;
  return finish_design(d);
}

double symmetric_design_wavenumber() {
  auto f = [](double k) {
    const double c = std::cos(k);
    const double s = std::sin(k);
    return 2.0 * c * c - std::sin(2.0 * k) - 4.0 * s * s;
  };
  double lo = 0.0;
  double hi = kPi / 4;  // f(0) = 2 > 0, f(pi/4) = -2 < 0
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double k = 0.5 * (lo + hi);
  if (std::abs(k - std::atan(0.5)) > 1e-14)
    fail(ErrorCode::kInvalidDesignPoint, "bisection disagrees with arctan(1/2)");
  return k;
}

}  // namespace crw
