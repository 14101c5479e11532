#pragma once

// Domain types shared by every scattering backend: channels, mechanical modes,
// coupling graphs, per-channel propagation status and the scattering result.
//
// Energies are dimensionless (units of the reference hopping of arms a/b).
// Channel order is fixed as a, b, c everywhere; matrix row/column index of a
// channel is index(channel).

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crw/errors.hpp"

namespace crw {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// |E| within this many xi of the band edge 2*xi is classified as BandEdge.
inline constexpr double kBandEdgeTolerance = 1e-9;
// |E - eps_i| within this (times the reference xi) is a pole of the effective parameters.
inline constexpr double kPoleTolerance = 1e-9;

enum class Channel : std::uint8_t { a = 0, b = 1, c = 2 };
enum class Mode : std::uint8_t { d1 = 0, d2 = 1, d3 = 2 };

constexpr std::size_t index(Channel ch) { return static_cast<std::size_t>(ch); }
constexpr std::size_t index(Mode m) { return static_cast<std::size_t>(m); }
constexpr Channel channel_at(std::size_t i) { return static_cast<Channel>(i); }
constexpr Mode mode_at(std::size_t i) { return static_cast<Mode>(i); }

std::string_view to_string(Channel ch);
std::string_view to_string(Mode m);
std::optional<Channel> parse_channel(std::string_view s);
std::optional<Mode> parse_mode(std::string_view s);

struct ChannelSpec {
  Channel label = Channel::a;
  double xi = 1.0;
};

struct MechanicalModeSpec {
  Mode label = Mode::d1;
  double delta = 0.0;
  double gamma = 0.0;
};

struct CouplingEdge {
  Channel channel = Channel::a;
  Mode mode = Mode::d1;
  double strength = 0.0;
  bool carries_phase = false;  // only the (b, d1) edge
};

enum class Topology { kTwoPort, kCirculatorTwoModes, kCirculatorThreeModes };

std::string_view to_string(Topology t);
std::optional<Topology> parse_topology(std::string_view s);
std::size_t channel_count(Topology t);
std::size_t mode_count(Topology t);

// Sign with which a detuning enters the mode's rotating-frame energy.
// kMinusDelta (eps_i = -Delta_i) is the convention under which the reported
// detuned operating points (converter 0.258, circulator 0.25, beam splitter
// 1/3) occur at positive Delta; kPlusDelta is the literal eps_i = +Delta_i.
enum class ModeEnergySign { kMinusDelta, kPlusDelta };

std::string_view to_string(ModeEnergySign s);
std::optional<ModeEnergySign> parse_mode_energy_sign(std::string_view s);

struct NodeSpec {
  Topology topology = Topology::kTwoPort;
  std::vector<MechanicalModeSpec> modes;
  std::vector<CouplingEdge> edges;
  double phi = 0.0;
  ModeEnergySign mode_energy_sign = ModeEnergySign::kMinusDelta;

  const MechanicalModeSpec& mode(Mode m) const;
  MechanicalModeSpec& mode(Mode m);
  // Rotating-frame energy of mode m (sign convention applied).
  double mode_energy(Mode m) const;
  // Coupling strength J_{l,i}; 0 when the edge is absent.
  double coupling(Channel ch, Mode m) const;
  void set_coupling(Channel ch, Mode m, double strength);
  bool has_edge(Channel ch, Mode m) const;
};

// Throws Error(kInvalidSpec) when the node violates its topology's edge set,
// mode count, gamma constraints or phase-edge rule.
void validate(const NodeSpec& node);
void validate(const NodeSpec& node, std::span<const ChannelSpec> channels);

// Convenience constructors for the three coupling graphs.
struct TwoPortParams {
  double j_a1 = 1.0, j_b1 = 1.0, j_a2 = 1.0, j_b2 = 1.0;
  double delta1 = 0.0, delta2 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0;
  double phi = 0.0;
};
struct CirculatorTwoModesParams {
  double j_a1 = 1.0, j_b1 = 1.0, j_a2 = 1.0, j_b2 = 1.0, j_c2 = 1.0;
  double delta1 = 0.0, delta2 = 0.0;
  double phi = 0.0;
};
struct CirculatorThreeModesParams {
  double j_a1 = 1.0, j_b1 = 1.0, j_a2 = 1.0, j_c2 = 1.0, j_b3 = 1.0, j_c3 = 1.0;
  double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0;
  double phi = 0.0;
};

NodeSpec make_node(const TwoPortParams& p);
NodeSpec make_node(const CirculatorTwoModesParams& p);
NodeSpec make_node(const CirculatorThreeModesParams& p);

std::vector<ChannelSpec> make_channels(double xi_a, double xi_b);
std::vector<ChannelSpec> make_channels(double xi_a, double xi_b, double xi_c);

class ChannelStatus {
 public:
  enum class Kind { kPropagating, kEvanescent, kBandEdge };

  static ChannelStatus propagating(double k);
  // z = e^{ik} of the decaying root, real with 0 < |z| < 1.
  static ChannelStatus evanescent(double z);
  static ChannelStatus band_edge();

  Kind kind() const { return kind_; }
  bool is_open() const { return kind_ == Kind::kPropagating; }
  double wavenumber() const;
  // Imaginary part of the wavenumber, -ln|z| > 0.
  double decay() const;
  // e^{ik}: unit-modulus for propagating channels, the decaying root otherwise.
  cplx phase_factor() const;
  std::string describe() const;

 private:
  ChannelStatus(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

double dispersion_energy(double k, double xi);
ChannelStatus channel_status_from_energy(double energy, double xi);
double group_velocity(double k, double xi);
double group_velocity(const ChannelStatus& status, double xi);

// Status of every channel at a shared energy, in channel order.
std::vector<ChannelStatus> statuses_at(double energy, std::span<const ChannelSpec> channels);
const ChannelSpec& find_channel(std::span<const ChannelSpec> channels, Channel ch);

// Shared scattering energy fixed by the incident arm's wavenumber. k at or
// within the band-edge tolerance of 0 or pi throws kBandEdge.
double incident_energy(double k, Channel incident, std::span<const ChannelSpec> channels);
// Throws kBandEdge if any channel sits on its band edge.
void reject_band_edges(std::span<const ChannelStatus> statuses,
                       std::span<const ChannelSpec> channels);

struct ScatteringResult {
  std::vector<ChannelSpec> channels;
  Eigen::MatrixXcd amplitudes;  // (out, in); NaN columns for closed incident channels
  Eigen::MatrixXd flows;        // (out, in); NaN columns for closed incident channels
  std::vector<ChannelStatus> statuses;
  double energy = 0.0;

  std::size_t size() const { return channels.size(); }
  bool is_open(Channel ch) const;
  cplx s(Channel out, Channel in) const;
  double flow(Channel out, Channel in) const;
  // Sum of flows over open output channels for incidence from `in`.
  double column_sum(Channel in) const;
  // max over open incident columns of |column_sum - 1|.
  double conservation_residual() const;
};

// Flow column I_{l', incident} = |s_{l'l}|^2 v_{l'} / v_l; evanescent rows are 0.
Eigen::VectorXd flows_from_amplitudes(const Eigen::MatrixXcd& amplitudes,
                                      std::span<const ChannelStatus> statuses,
                                      std::span<const ChannelSpec> channels, Channel incident);

// Fills result.flows from result.amplitudes for every open incident column.
void fill_flows(ScatteringResult& result);

// Velocity-weighted matrix T_{l'l} = s_{l'l} sqrt(v_{l'}/v_l) restricted to open channels.
Eigen::MatrixXcd velocity_weighted_open_block(const ScatteringResult& result);

}  // namespace crw
