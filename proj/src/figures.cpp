#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "crw/sweep.hpp"
#include "crw/threeport.hpp"

namespace crw {

namespace {

constexpr double kDetuningSpan = 4.0;

SweepSpec k_sweep(std::string name, NodeSpec node, std::vector<ChannelSpec> channels,
                  std::optional<Channel> incident, int steps) {
  SweepSpec s;
  s.name = std::move(name);
  s.scenario.node = std::move(node);
  s.scenario.channels = std::move(channels);
  s.scenario.incident = incident;
  s.variable = {SweepVariable::kK};
  s.lo = 0.0;
  s.hi = kPi;
  s.steps = steps;
  return s;
}

SweepSpec detuning_sweep(std::string name, NodeSpec node, std::vector<ChannelSpec> channels,
                         std::optional<Channel> incident, SweepVariable var, double k,
                         int steps) {
  SweepSpec s = k_sweep(std::move(name), std::move(node), std::move(channels), incident, steps);
  s.scenario.k_channel = Channel::a;
  s.scenario.k = k;
  s.variable = {var};
  s.lo = -kDetuningSpan;
  s.hi = kDetuningSpan;
  return s;
}

NodeSpec converter(double phi, double j2) {
  return make_node(TwoPortParams{1.0, 1.0, j2, j2, 0.0, 0.0, 0.0, 0.0, phi});
}

NodeSpec two_mode_circulator(double phi) {
  return make_node(CirculatorTwoModesParams{1.0, 1.0, 1.2, 1.2, 1.0, 0.0, 0.0, phi});
}

NodeSpec equal_three_mode(double phi) {
  const double j = equal_design_coupling(phi);
  return make_node(CirculatorThreeModesParams{j, j, j, j, j, j, 0.0, 0.0, 0.0, phi});
}

struct FigureId {
  int figure;
  char panel;
};

std::optional<FigureId> parse_id(std::string_view id) {
  if (id.size() < 5 || id.substr(0, 3) != "fig") return std::nullopt;
  const auto digits = id.substr(3, id.size() - 4);
  const char panel = id.back();
  int fig = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    fig = fig * 10 + (c - '0');
  }
  const auto ids = figure_ids();
  if (std::find(ids.begin(), ids.end(), std::string(id)) == ids.end()) return std::nullopt;
  return FigureId{fig, panel};
}

}  // namespace

std::vector<std::string> figure_ids() {
  std::vector<std::string> ids;
  for (char p : {'a', 'b', 'c', 'd'}) ids.push_back(fmt::format("fig2{}", p));
  for (char p : {'a', 'b', 'c', 'd'}) ids.push_back(fmt::format("fig3{}", p));
  for (int f : {5, 6, 8, 9, 10})
    for (char p : {'a', 'b', 'c', 'd', 'e', 'f'}) ids.push_back(fmt::format("fig{}{}", f, p));
  return ids;
}

SweepSpec reproduce_figure(std::string_view id, int steps) {
  const auto parsed = parse_id(id);
  if (!parsed) fail(ErrorCode::kUnknownFigure, fmt::format("unknown figure id '{}'", id));
  const auto [fig, panel] = *parsed;
  const std::string name(id);
  // Panels (a)-(c) / (d)-(f) of the three-port figures are incidence from a, b, c.
  const int p = panel - 'a';
  const Channel in3 = channel_at(static_cast<std::size_t>(p % 3));
  const bool second_half = p >= 3;

  SweepSpec s;
  switch (fig) {
    case 2: {
      const double phi = (p % 2 == 0) ? kPi / 2 : 3 * kPi / 2;
      const double j2 = p < 2 ? 2.0 : 4.0;
      s = k_sweep(name, converter(phi, j2), make_channels(1.0, 1.0), std::nullopt, steps);
      s.rules = {{DerivedRuleKind::kOptimalDamping}};
      break;
    }
    case 3: {
      const auto var = (p % 2 == 0) ? SweepVariable::kDelta1 : SweepVariable::kDelta2;
      const double k = p < 2 ? kPi / 4 : 3 * kPi / 4;
      s = detuning_sweep(name, converter(kPi / 2, 4.0), make_channels(1.0, 1.0), std::nullopt,
                         var, k, steps);
      s.rules = {{DerivedRuleKind::kOptimalDamping}};
      break;
    }
    case 5: {
      const double phi = second_half ? 3 * kPi / 2 : kPi / 2;
      s = k_sweep(name, two_mode_circulator(phi), make_channels(1.0, 1.0, 1.0), in3, steps);
      s.rules = {{DerivedRuleKind::kCirculatorTwoModeDesign, kPi / 4}};
      break;
    }
    case 6: {
      const auto var = second_half ? SweepVariable::kDelta2 : SweepVariable::kDelta1;
      s = detuning_sweep(name, two_mode_circulator(kPi / 2), make_channels(1.0, 1.0, 1.0), in3,
                         var, kPi / 4, steps);
      s.rules = {{DerivedRuleKind::kCirculatorTwoModeDesign, kPi / 4}};
      break;
    }
    case 8: {
      const double phi = second_half ? 5 * kPi / 3 : kPi / 3;
      s = k_sweep(name, equal_three_mode(phi), make_channels(1.0, 1.0, 1.0), in3, steps);
      break;
    }
    case 9: {
      // Rounded design wavenumber as quoted for this figure. At exactly pi/6 the
      // energy equals the mode energy at Delta = sqrt3 and the closed form has a pole.
      const double k = 0.5236;
      const auto var = second_half ? SweepVariable::kDelta2 : SweepVariable::kDelta1;
      s = detuning_sweep(name, equal_three_mode(kPi / 3), make_channels(1.0, 1.0, 1.0), in3, var,
                         k, steps);
      if (second_half) s.rules = {{DerivedRuleKind::kDelta3FollowsDelta2}};
      break;
    }
    case 10: {
      const auto d = design_circulator_three_modes_at_k(second_half ? 0.2 * kPi : 0.1 * kPi);
      s = k_sweep(name, d.node(), d.channels(), in3, steps);
      break;
    }
    default: fail(ErrorCode::kUnknownFigure, fmt::format("unknown figure id '{}'", id));
  }
  validate(s);
  return s;
}

}  // namespace crw
