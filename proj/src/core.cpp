#include "crw/core.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace crw {

std::string_view reason_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kBandEdge: return "band-edge";
    case ErrorCode::kVelocityUndefined: return "velocity-undefined";
    case ErrorCode::kIncidentClosed: return "incident-closed";
    case ErrorCode::kPoleAtMechanicalResonance: return "pole";
    case ErrorCode::kSingularNodeMatrix: return "singular";
    case ErrorCode::kSingularBoundarySystem: return "singular-boundary";
    case ErrorCode::kKOutOfDesignRange: return "k-out-of-design-range";
    case ErrorCode::kDegeneratePhase: return "degenerate-phase";
    case ErrorCode::kNegativeRadicand: return "negative-radicand";
    case ErrorCode::kInvalidDesignPoint: return "invalid-design-point";
    case ErrorCode::kPacketNotCleared: return "packet-not-cleared";
    case ErrorCode::kNormDrift: return "norm-drift";
    case ErrorCode::kUnsupportedScenario: return "unsupported-scenario";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kUnknownFigure: return "unknown-figure";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

bool is_physics_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBandEdge:
    case ErrorCode::kVelocityUndefined:
    case ErrorCode::kIncidentClosed:
    case ErrorCode::kPoleAtMechanicalResonance:
    case ErrorCode::kSingularNodeMatrix:
    case ErrorCode::kSingularBoundarySystem:
    case ErrorCode::kPacketNotCleared:
    case ErrorCode::kNormDrift:
    case ErrorCode::kDomain:
      return true;
    default:
      return false;
  }
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

std::string_view to_string(Channel ch) {
  switch (ch) {
    case Channel::a: return "a";
    case Channel::b: return "b";
    case Channel::c: return "c";
  }
  return "?";
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::d1: return "d1";
    case Mode::d2: return "d2";
    case Mode::d3: return "d3";
  }
  return "?";
}

std::optional<Channel> parse_channel(std::string_view s) {
  if (s == "a") return Channel::a;
  if (s == "b") return Channel::b;
  if (s == "c") return Channel::c;
  return std::nullopt;
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "d1") return Mode::d1;
  if (s == "d2") return Mode::d2;
  if (s == "d3") return Mode::d3;
  return std::nullopt;
}

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::kTwoPort: return "two-port";
    case Topology::kCirculatorTwoModes: return "circulator-two-modes";
    case Topology::kCirculatorThreeModes: return "circulator-three-modes";
  }
  return "?";
}

std::optional<Topology> parse_topology(std::string_view s) {
  if (s == "two-port") return Topology::kTwoPort;
  if (s == "circulator-two-modes") return Topology::kCirculatorTwoModes;
  if (s == "circulator-three-modes") return Topology::kCirculatorThreeModes;
  return std::nullopt;
}

std::size_t channel_count(Topology t) { return t == Topology::kTwoPort ? 2 : 3; }
std::size_t mode_count(Topology t) { return t == Topology::kCirculatorThreeModes ? 3 : 2; }

std::string_view to_string(ModeEnergySign s) {
  return s == ModeEnergySign::kMinusDelta ? "minus-delta" : "plus-delta";
}

std::optional<ModeEnergySign> parse_mode_energy_sign(std::string_view s) {
  if (s == "minus-delta") return ModeEnergySign::kMinusDelta;
  if (s == "plus-delta") return ModeEnergySign::kPlusDelta;
  return std::nullopt;
}

const MechanicalModeSpec& NodeSpec::mode(Mode m) const {
  for (const auto& spec : modes)
    if (spec.label == m) return spec;
  fail(ErrorCode::kInvalidSpec, fmt::format("node has no mechanical mode {}", to_string(m)));
}

MechanicalModeSpec& NodeSpec::mode(Mode m) {
  for (auto& spec : modes)
    if (spec.label == m) return spec;
  fail(ErrorCode::kInvalidSpec, fmt::format("node has no mechanical mode {}", to_string(m)));
}

double NodeSpec::mode_energy(Mode m) const {
  const double delta = mode(m).delta;
  return mode_energy_sign == ModeEnergySign::kMinusDelta ? -delta : delta;
}

double NodeSpec::coupling(Channel ch, Mode m) const {
  for (const auto& e : edges)
    if (e.channel == ch && e.mode == m) return e.strength;
  return 0.0;
}

void NodeSpec::set_coupling(Channel ch, Mode m, double strength) {
  for (auto& e : edges) {
    if (e.channel == ch && e.mode == m) {
      e.strength = strength;
      return;
    }
  }
  fail(ErrorCode::kInvalidSpec,
       fmt::format("node has no coupling edge ({},{})", to_string(ch), to_string(m)));
}

bool NodeSpec::has_edge(Channel ch, Mode m) const {
  return std::any_of(edges.begin(), edges.end(),
                     [&](const CouplingEdge& e) { return e.channel == ch && e.mode == m; });
}

namespace {

using EdgeKey = std::pair<Channel, Mode>;

std::vector<EdgeKey> required_edges(Topology t) {
  using C = Channel;
  using M = Mode;
  switch (t) {
    case Topology::kTwoPort:
      return {{C::a, M::d1}, {C::b, M::d1}, {C::a, M::d2}, {C::b, M::d2}};
    case Topology::kCirculatorTwoModes:
      return {{C::a, M::d1}, {C::b, M::d1}, {C::a, M::d2}, {C::b, M::d2}, {C::c, M::d2}};
    case Topology::kCirculatorThreeModes:
      return {{C::a, M::d1}, {C::b, M::d1}, {C::a, M::d2},
              {C::c, M::d2}, {C::b, M::d3}, {C::c, M::d3}};
  }
  return {};
}

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorCode::kInvalidSpec, msg); }

}  // namespace

void validate(const NodeSpec& node) {
  const auto topo = to_string(node.topology);
  if (node.modes.size() != mode_count(node.topology))
    invalid(fmt::format("{} requires {} mechanical modes, got {}", topo,
                        mode_count(node.topology), node.modes.size()));
  for (std::size_t i = 0; i < node.modes.size(); ++i) {
    const auto& m = node.modes[i];
    if (m.label != mode_at(i))
      invalid(fmt::format("mode {} must be labelled {}", i, to_string(mode_at(i))));
    if (!std::isfinite(m.delta) || !std::isfinite(m.gamma))
      invalid(fmt::format("mode {} has non-finite parameters", to_string(m.label)));
    if (m.gamma < 0.0) invalid(fmt::format("mode {} damping must be >= 0", to_string(m.label)));
    if (node.topology != Topology::kTwoPort && m.gamma != 0.0)
      invalid(fmt::format("{} is dissipation-free: mode {} must have gamma = 0", topo,
                          to_string(m.label)));
  }

  const auto required = required_edges(node.topology);
  if (node.edges.size() != required.size())
    invalid(fmt::format("{} requires {} coupling edges, got {}", topo, required.size(),
                        node.edges.size()));
  int phase_edges = 0;
  for (const auto& e : node.edges) {
    const bool expected = std::find(required.begin(), required.end(),
                                    EdgeKey{e.channel, e.mode}) != required.end();
    if (!expected)
      invalid(fmt::format("edge ({},{}) is not part of the {} graph", to_string(e.channel),
                          to_string(e.mode), topo));
    const auto dup = std::count_if(node.edges.begin(), node.edges.end(), [&](const auto& o) {
      return o.channel == e.channel && o.mode == e.mode;
    });
    if (dup != 1)
      invalid(fmt::format("edge ({},{}) listed more than once", to_string(e.channel),
                          to_string(e.mode)));
    if (!std::isfinite(e.strength) || e.strength < 0.0)
      invalid(fmt::format("edge ({},{}) strength must be finite and >= 0", to_string(e.channel),
                          to_string(e.mode)));
    if (e.carries_phase) {
      ++phase_edges;
      if (e.channel != Channel::b || e.mode != Mode::d1)
        invalid("only the (b,d1) edge may carry the synthetic phase");
    }
  }
  if (phase_edges != 1) invalid("exactly one edge, (b,d1), must carry the synthetic phase");
  if (!std::isfinite(node.phi) || node.phi < 0.0 || node.phi >= 2.0 * kPi)
    invalid("phase phi must lie in [0, 2pi)");
}

void validate(const NodeSpec& node, std::span<const ChannelSpec> channels) {
  validate(node);
  const auto n = channel_count(node.topology);
  if (channels.size() != n)
    invalid(fmt::format("{} requires {} channels, got {}", to_string(node.topology), n,
                        channels.size()));
  for (std::size_t i = 0; i < n; ++i) {
    if (channels[i].label != channel_at(i))
      invalid(fmt::format("channel {} must be labelled {}", i, to_string(channel_at(i))));
    if (!std::isfinite(channels[i].xi) || channels[i].xi <= 0.0)
      invalid(fmt::format("channel {} hopping xi must be > 0", to_string(channels[i].label)));
  }
}

namespace {

double wrap_phase(double phi) {
  double w = std::fmod(phi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  if (w >= 2.0 * kPi) w = 0.0;
  return w;
}

}  // namespace

NodeSpec make_node(const TwoPortParams& p) {
  NodeSpec node;
  node.topology = Topology::kTwoPort;
  node.modes = {{Mode::d1, p.delta1, p.gamma1}, {Mode::d2, p.delta2, p.gamma2}};
  node.edges = {{Channel::a, Mode::d1, p.j_a1, false},
                {Channel::b, Mode::d1, p.j_b1, true},
                {Channel::a, Mode::d2, p.j_a2, false},
                {Channel::b, Mode::d2, p.j_b2, false}};
  node.phi = wrap_phase(p.phi);
  return node;
}

NodeSpec make_node(const CirculatorTwoModesParams& p) {
  NodeSpec node;
  node.topology = Topology::kCirculatorTwoModes;
  node.modes = {{Mode::d1, p.delta1, 0.0}, {Mode::d2, p.delta2, 0.0}};
  node.edges = {{Channel::a, Mode::d1, p.j_a1, false},
                {Channel::b, Mode::d1, p.j_b1, true},
                {Channel::a, Mode::d2, p.j_a2, false},
                {Channel::b, Mode::d2, p.j_b2, false},
                {Channel::c, Mode::d2, p.j_c2, false}};
  node.phi = wrap_phase(p.phi);
  return node;
}

NodeSpec make_node(const CirculatorThreeModesParams& p) {
  NodeSpec node;
  node.topology = Topology::kCirculatorThreeModes;
  node.modes = {{Mode::d1, p.delta1, 0.0}, {Mode::d2, p.delta2, 0.0}, {Mode::d3, p.delta3, 0.0}};
  node.edges = {{Channel::a, Mode::d1, p.j_a1, false},
                {Channel::b, Mode::d1, p.j_b1, true},
                {Channel::a, Mode::d2, p.j_a2, false},
                {Channel::c, Mode::d2, p.j_c2, false},
                {Channel::b, Mode::d3, p.j_b3, false},
                {Channel::c, Mode::d3, p.j_c3, false}};
  node.phi = wrap_phase(p.phi);
  return node;
}

std::vector<ChannelSpec> make_channels(double xi_a, double xi_b) {
  return {{Channel::a, xi_a}, {Channel::b, xi_b}};
}

std::vector<ChannelSpec> make_channels(double xi_a, double xi_b, double xi_c) {
  return {{Channel::a, xi_a}, {Channel::b, xi_b}, {Channel::c, xi_c}};
}

ChannelStatus ChannelStatus::propagating(double k) {
  if (!(k > 0.0 && k < kPi))
    fail(ErrorCode::kDomain, fmt::format("propagating wavenumber {} outside (0, pi)", k));
  return {Kind::kPropagating, k};
}

ChannelStatus ChannelStatus::evanescent(double z) {
  if (!(std::abs(z) < 1.0 && z != 0.0))
    fail(ErrorCode::kDomain, fmt::format("evanescent factor {} must satisfy 0 < |z| < 1", z));
  return {Kind::kEvanescent, z};
}

ChannelStatus ChannelStatus::band_edge() { return {Kind::kBandEdge, 0.0}; }

double ChannelStatus::wavenumber() const {
  if (kind_ != Kind::kPropagating)
    fail(ErrorCode::kVelocityUndefined, "wavenumber requested for a non-propagating channel");
  return value_;
}

double ChannelStatus::decay() const {
  if (kind_ != Kind::kEvanescent) fail(ErrorCode::kDomain, "decay requested for an open channel");
  return -std::log(std::abs(value_));
}

cplx ChannelStatus::phase_factor() const {
  switch (kind_) {
    case Kind::kPropagating: return std::polar(1.0, value_);
    case Kind::kEvanescent: return {value_, 0.0};
    case Kind::kBandEdge: break;
  }
  fail(ErrorCode::kBandEdge, "channel sits on its band edge");
}

std::string ChannelStatus::describe() const {
  switch (kind_) {
    case Kind::kPropagating: return fmt::format("propagating k={:.12g}", value_);
    case Kind::kEvanescent: return fmt::format("evanescent z={:.12g}", value_);
    case Kind::kBandEdge: return "band-edge";
  }
  return "?";
}

double dispersion_energy(double k, double xi) {
  if (!(k > 0.0 && k < kPi))
    fail(ErrorCode::kDomain, fmt::format("wavenumber {} outside (0, pi)", k));
  if (!(xi > 0.0)) fail(ErrorCode::kDomain, "hopping xi must be > 0");
  return -2.0 * xi * std::cos(k);
}

ChannelStatus channel_status_from_energy(double energy, double xi) {
  if (!(xi > 0.0)) fail(ErrorCode::kDomain, "hopping xi must be > 0");
  const double margin = std::abs(energy) - 2.0 * xi;
  if (std::abs(margin) <= kBandEdgeTolerance * xi) return ChannelStatus::band_edge();
  if (margin < 0.0) return ChannelStatus::propagating(std::acos(-energy / (2.0 * xi)));
  // z + 1/z = q with |q| > 2: take the large root stably and invert it.
  const double q = -energy / xi;
  const double big = 0.5 * (q + std::copysign(std::sqrt(q * q - 4.0), q));
  return ChannelStatus::evanescent(1.0 / big);
}

double group_velocity(double k, double xi) {
  if (!(k > 0.0 && k < kPi))
    fail(ErrorCode::kVelocityUndefined, fmt::format("wavenumber {} outside (0, pi)", k));
  return group_velocity(channel_status_from_energy(dispersion_energy(k, xi), xi), xi);
}

double group_velocity(const ChannelStatus& status, double xi) {
  if (!status.is_open())
    fail(ErrorCode::kVelocityUndefined,
         fmt::format("group velocity undefined for {} channel", status.describe()));
  return xi * std::sin(status.wavenumber());
}

std::vector<ChannelStatus> statuses_at(double energy, std::span<const ChannelSpec> channels) {
  std::vector<ChannelStatus> out;
  out.reserve(channels.size());
  for (const auto& ch : channels) out.push_back(channel_status_from_energy(energy, ch.xi));
  return out;
}

const ChannelSpec& find_channel(std::span<const ChannelSpec> channels, Channel ch) {
  for (const auto& spec : channels)
    if (spec.label == ch) return spec;
  fail(ErrorCode::kInvalidSpec, fmt::format("no channel {}", to_string(ch)));
}

double incident_energy(double k, Channel incident, std::span<const ChannelSpec> channels) {
  const double xi = find_channel(channels, incident).xi;
  if (!std::isfinite(k) || k < 0.0 || k > kPi)
    fail(ErrorCode::kDomain, fmt::format("wavenumber {} outside (0, pi)", k));
  if (k == 0.0 || k == kPi)
    fail(ErrorCode::kBandEdge, fmt::format("band edge: k={} has zero group velocity", k));
  const double energy = dispersion_energy(k, xi);
  if (channel_status_from_energy(energy, xi).kind() == ChannelStatus::Kind::kBandEdge)
    fail(ErrorCode::kBandEdge, fmt::format("band edge: k={} is within tolerance of the edge", k));
  return energy;
}

void reject_band_edges(std::span<const ChannelStatus> statuses,
                       std::span<const ChannelSpec> channels) {
  for (std::size_t i = 0; i < statuses.size(); ++i)
    if (statuses[i].kind() == ChannelStatus::Kind::kBandEdge)
      fail(ErrorCode::kBandEdge,
           fmt::format("band edge: channel {} sits on its band edge", to_string(channels[i].label)));
}

bool ScatteringResult::is_open(Channel ch) const { return statuses.at(index(ch)).is_open(); }

cplx ScatteringResult::s(Channel out, Channel in) const {
  if (!is_open(in))
    fail(ErrorCode::kIncidentClosed, fmt::format("channel {} is closed", to_string(in)));
  return amplitudes(index(out), index(in));
}

double ScatteringResult::flow(Channel out, Channel in) const {
  if (!is_open(in))
    fail(ErrorCode::kIncidentClosed, fmt::format("channel {} is closed", to_string(in)));
  return flows(index(out), index(in));
}

double ScatteringResult::column_sum(Channel in) const {
  return flows.col(static_cast<Eigen::Index>(index(in))).sum();
}

double ScatteringResult::conservation_residual() const {
  double worst = 0.0;
  for (std::size_t l = 0; l < size(); ++l)
    if (statuses[l].is_open())
      worst = std::max(worst, std::abs(column_sum(channel_at(l)) - 1.0));
  return worst;
}

Eigen::VectorXd flows_from_amplitudes(const Eigen::MatrixXcd& amplitudes,
                                      std::span<const ChannelStatus> statuses,
                                      std::span<const ChannelSpec> channels, Channel incident) {
  const auto in = index(incident);
  if (!statuses[in].is_open())
    fail(ErrorCode::kIncidentClosed,
         fmt::format("incident channel {} is not propagating", to_string(incident)));
  const double v_in = group_velocity(statuses[in], channels[in].xi);
  Eigen::VectorXd column = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(statuses.size()));
  for (std::size_t out = 0; out < statuses.size(); ++out) {
    if (!statuses[out].is_open()) continue;
    const double v_out = group_velocity(statuses[out], channels[out].xi);
    const auto i = static_cast<Eigen::Index>(out);
    column(i) = std::norm(amplitudes(i, static_cast<Eigen::Index>(in))) * v_out / v_in;
  }
  return column;
}

void fill_flows(ScatteringResult& result) {
  const auto n = static_cast<Eigen::Index>(result.size());
  result.flows = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t l = 0; l < result.size(); ++l) {
    if (!result.statuses[l].is_open()) continue;
    result.flows.col(static_cast<Eigen::Index>(l)) =
        flows_from_amplitudes(result.amplitudes, result.statuses, result.channels, channel_at(l));
  }
}

Eigen::MatrixXcd velocity_weighted_open_block(const ScatteringResult& result) {
  std::vector<std::size_t> open;
  for (std::size_t l = 0; l < result.size(); ++l)
    if (result.statuses[l].is_open()) open.push_back(l);
  const auto m = static_cast<Eigen::Index>(open.size());
  Eigen::MatrixXcd t(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double v_out = group_velocity(result.statuses[open[r]], result.channels[open[r]].xi);
    for (Eigen::Index c = 0; c < m; ++c) {
      const double v_in = group_velocity(result.statuses[open[c]], result.channels[open[c]].xi);
      t(r, c) = result.amplitudes(static_cast<Eigen::Index>(open[r]),
                                  static_cast<Eigen::Index>(open[c])) *
                std::sqrt(v_out / v_in);
    }
  }
  return t;
}

}  // namespace crw
