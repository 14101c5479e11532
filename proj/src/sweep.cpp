#include "crw/sweep.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "crw/threeport.hpp"
#include "crw/twoport.hpp"

namespace crw {

namespace {

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorCode::kInvalidSpec, msg); }

double wrap_phase(double phi) {
  double w = std::fmod(phi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w >= 2.0 * kPi ? 0.0 : w;
}

bool has_rule(const SweepSpec& spec, DerivedRuleKind kind) {
  return std::any_of(spec.rules.begin(), spec.rules.end(),
                     [&](const DerivedRule& r) { return r.kind == kind; });
}

}  // namespace

std::optional<SweepTarget> parse_sweep_target(std::string_view s) {
  if (s == "k") return SweepTarget{SweepVariable::kK};
  if (s == "delta1") return SweepTarget{SweepVariable::kDelta1};
  if (s == "delta2") return SweepTarget{SweepVariable::kDelta2};
  if (s == "delta3") return SweepTarget{SweepVariable::kDelta3};
  if (s == "phi") return SweepTarget{SweepVariable::kPhi};
  if (s.size() == 4 && s.substr(0, 2) == "J_") {
    const auto ch = parse_channel(s.substr(2, 1));
    const auto m = parse_mode(fmt::format("d{}", s[3]));
    if (ch && m) return SweepTarget{SweepVariable::kCoupling, *ch, *m};
  }
  return std::nullopt;
}

std::string to_string(const SweepTarget& t) {
  switch (t.kind) {
    case SweepVariable::kK: return "k";
    case SweepVariable::kDelta1: return "delta1";
    case SweepVariable::kDelta2: return "delta2";
    case SweepVariable::kDelta3: return "delta3";
    case SweepVariable::kPhi: return "phi";
    case SweepVariable::kCoupling:
      return fmt::format("J_{}{}", to_string(t.channel), index(t.mode) + 1);
  }
  return "?";
}

std::string_view to_string(DerivedRuleKind k) {
  switch (k) {
    case DerivedRuleKind::kOptimalDamping: return "optimal-damping";
    case DerivedRuleKind::kCirculatorTwoModeDesign: return "two-mode-design";
    case DerivedRuleKind::kDelta3FollowsDelta2: return "delta3-follows-delta2";
  }
  return "?";
}

std::optional<DerivedRuleKind> parse_derived_rule(std::string_view s) {
  for (auto k : {DerivedRuleKind::kOptimalDamping, DerivedRuleKind::kCirculatorTwoModeDesign,
                 DerivedRuleKind::kDelta3FollowsDelta2})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

void validate(const SweepSpec& spec) {
  const auto& sc = spec.scenario;
  if (spec.steps < 2) invalid(fmt::format("sweep needs at least 2 steps, got {}", spec.steps));
  if (!std::isfinite(spec.lo) || !std::isfinite(spec.hi) || !(spec.lo < spec.hi))
    invalid(fmt::format("sweep range must satisfy lo < hi (got {} .. {})", spec.lo, spec.hi));
  const auto topo = sc.node.topology;
  switch (spec.variable.kind) {
    case SweepVariable::kK:
      if (spec.lo < 0.0 || spec.hi > kPi) invalid("k sweep range must lie within [0, pi]");
      break;
    case SweepVariable::kDelta3:
      if (topo != Topology::kCirculatorThreeModes)
        invalid("delta3 only exists in the three-mode circulator");
      if (has_rule(spec, DerivedRuleKind::kDelta3FollowsDelta2))
        invalid("delta3 is fixed by the delta3-follows-delta2 rule and cannot be swept");
      break;
    case SweepVariable::kCoupling:
      if (!sc.node.has_edge(spec.variable.channel, spec.variable.mode))
        invalid(fmt::format("no coupling edge {} in this topology", to_string(spec.variable)));
      if (has_rule(spec, DerivedRuleKind::kCirculatorTwoModeDesign) &&
          spec.variable.channel == Channel::c)
        invalid("J_c2 is fixed by the two-mode-design rule and cannot be swept");
      if (spec.lo < 0.0) invalid("coupling sweeps must stay >= 0");
      break;
    default: break;
  }
  for (const auto& r : spec.rules) {
    switch (r.kind) {
      case DerivedRuleKind::kOptimalDamping:
        if (topo != Topology::kTwoPort) invalid("optimal-damping applies to the two-port only");
        break;
      case DerivedRuleKind::kCirculatorTwoModeDesign:
        if (topo != Topology::kCirculatorTwoModes)
          invalid("two-mode-design applies to the two-mode circulator only");
        if (!(r.design_k > 0.0 && r.design_k < kPi)) invalid("design wavenumber outside (0, pi)");
        break;
      case DerivedRuleKind::kDelta3FollowsDelta2:
        if (topo != Topology::kCirculatorThreeModes)
          invalid("delta3-follows-delta2 applies to the three-mode circulator only");
        break;
    }
  }
  const auto ref = sc.reference_channel();
  const auto n = sc.channels.size();
  if (index(ref) >= n || (sc.incident && index(*sc.incident) >= n))
    invalid("incident or reference channel not present in this topology");
  if (spec.variable.kind != SweepVariable::kK && !(sc.k > 0.0 && sc.k < kPi))
    invalid("fixed wavenumber must lie in (0, pi)");
  try {
    const auto first = scenario_at(spec, sweep_grid(spec).front());
    validate(first.node, first.channels);
  } catch (const Error& e) {
    invalid(fmt::format("invalid sweep scenario: {}", e.what()));
  }
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
  std::vector<double> grid(static_cast<std::size_t>(std::max(spec.steps, 0)));
  const bool centred = spec.variable.kind == SweepVariable::kK;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = centred ? (static_cast<double>(i) + 0.5) / spec.steps
                             : static_cast<double>(i) / (spec.steps - 1);
    grid[i] = spec.lo + t * (spec.hi - spec.lo);
  }
  if (!centred && !grid.empty()) grid.back() = spec.hi;
  return grid;
}

void apply_derived_rules(const std::vector<DerivedRule>& rules, NodeSpec& node,
                         std::vector<ChannelSpec>& channels) {
  for (const auto& r : rules) {
    switch (r.kind) {
      case DerivedRuleKind::kOptimalDamping:
        node.mode(Mode::d2).gamma =
            optimal_damping(node.coupling(Channel::a, Mode::d2), channels.at(0).xi);
        break;
      case DerivedRuleKind::kCirculatorTwoModeDesign: {
        const auto v = two_mode_design_values(node.coupling(Channel::a, Mode::d2), r.design_k,
                                              channels.at(0).xi);
        node.set_coupling(Channel::c, Mode::d2, v.j_c2);
        channels.at(2).xi = v.xi_c;
        break;
      }
      case DerivedRuleKind::kDelta3FollowsDelta2:
        node.mode(Mode::d3).delta = node.mode(Mode::d2).delta;
        break;
    }
  }
}

SweepScenario scenario_at(const SweepSpec& spec, double value) {
  SweepScenario sc = spec.scenario;
  auto& node = sc.node;
  switch (spec.variable.kind) {
    case SweepVariable::kK: sc.k = value; break;
    case SweepVariable::kDelta1: node.mode(Mode::d1).delta = value; break;
    case SweepVariable::kDelta2: node.mode(Mode::d2).delta = value; break;
    case SweepVariable::kDelta3: node.mode(Mode::d3).delta = value; break;
    case SweepVariable::kPhi: node.phi = wrap_phase(value); break;
    case SweepVariable::kCoupling:
      node.set_coupling(spec.variable.channel, spec.variable.mode, value);
      break;
  }
  apply_derived_rules(spec.rules, node, sc.channels);
  return sc;
}

namespace {

SweepRecord evaluate_point(const SweepSpec& spec, std::size_t i, double value) {
  SweepRecord rec;
  rec.index = i;
  rec.value = value;
  const auto sc = scenario_at(spec, value);
  const auto n = static_cast<Eigen::Index>(sc.channels.size());
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  rec.flows = Eigen::MatrixXd::Constant(n, n, nan);
  rec.amplitudes = Eigen::MatrixXcd::Constant(n, n, cplx(nan, nan));
  rec.conservation_residual = nan;
  rec.max_column_sum = nan;
  rec.lossless = std::all_of(sc.node.modes.begin(), sc.node.modes.end(),
                             [](const MechanicalModeSpec& m) { return m.gamma == 0.0; });
  const auto ref = sc.reference_channel();
  const double xi_ref = find_channel(sc.channels, ref).xi;
  rec.energy = -2.0 * xi_ref * std::cos(sc.k);

  try {
    rec.energy = incident_energy(sc.k, ref, sc.channels);
    const auto r = smatrix_at_energy(rec.energy, sc.node, sc.channels);
    rec.statuses = r.statuses;
    std::string closed;
    double residual = 0.0;
    double max_sum = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      if (!r.statuses[static_cast<std::size_t>(l)].is_open()) {
        closed += closed.empty() ? "" : "+";
        closed += to_string(channel_at(static_cast<std::size_t>(l)));
        continue;
      }
      if (sc.incident && index(*sc.incident) != static_cast<std::size_t>(l)) continue;
      rec.flows.col(l) = r.flows.col(l);
      rec.amplitudes.col(l) = r.amplitudes.col(l);
      const double sum = r.flows.col(l).sum();
      residual = std::max(residual, std::abs(sum - 1.0));
      max_sum = std::max(max_sum, sum);
    }
    rec.conservation_residual = residual;
    rec.max_column_sum = max_sum;
    rec.status = closed.empty() ? "ok" : "closed:" + closed;
    rec.computed = true;
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kBandEdge: rec.status = "band-edge"; break;
      case ErrorCode::kPoleAtMechanicalResonance: rec.status = "pole"; break;
      case ErrorCode::kSingularNodeMatrix: rec.status = "singular"; break;
      default: throw;
    }
  }
  return rec;
}

}  // namespace

unsigned default_thread_count() {
  if (const char* env = std::getenv("CRW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec, unsigned threads) {
  validate(spec);
  const auto grid = sweep_grid(spec);
  std::vector<SweepRecord> out(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  if (threads == 0) threads = default_thread_count();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.size())));

  auto work = [&](unsigned t) {
    for (std::size_t i = t; i < grid.size(); i += threads) {
      try {
        out[i] = evaluate_point(spec, i, grid[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

bool passes_conservation_audit(const SweepRecord& r, double tol) {
  if (!r.computed) return true;
  return r.lossless ? r.conservation_residual <= tol : r.max_column_sum <= 1.0 + tol;
}

}  // namespace crw
