#pragma once

// One-dimensional parameter sweeps and the canned figure datasets.

#include <optional>
#include <string>
#include <vector>

#include "crw/core.hpp"

namespace crw {

enum class SweepVariable { kK, kDelta1, kDelta2, kDelta3, kPhi, kCoupling };

struct SweepTarget {
  SweepVariable kind = SweepVariable::kK;
  Channel channel = Channel::a;  // coupling sweeps only
  Mode mode = Mode::d1;
};

// "k", "delta1".."delta3", "phi", or "J_<channel><mode index>" such as "J_c2".
std::optional<SweepTarget> parse_sweep_target(std::string_view s);
std::string to_string(const SweepTarget& t);

enum class DerivedRuleKind {
  kOptimalDamping,           // gamma_2 = optimal_damping(J_{a,2}, xi_a)
  kCirculatorTwoModeDesign,  // J_{c,2}, xi_c from J_{a,2} at design_k
  kDelta3FollowsDelta2,      // Delta_3 = Delta_2
};

struct DerivedRule {
  DerivedRuleKind kind = DerivedRuleKind::kOptimalDamping;
  double design_k = kPi / 4;
};

std::string_view to_string(DerivedRuleKind k);
std::optional<DerivedRuleKind> parse_derived_rule(std::string_view s);

struct SweepScenario {
  NodeSpec node;
  std::vector<ChannelSpec> channels;
  // nullopt means every open incident column is recorded.
  std::optional<Channel> incident;
  // Arm whose wavenumber defines the shared energy; defaults to the incident
  // arm, or a when every column is recorded.
  std::optional<Channel> k_channel;
  // Wavenumber in that arm for sweeps over other variables.
  double k = kPi / 4;

  Channel reference_channel() const { return k_channel.value_or(incident.value_or(Channel::a)); }
};

struct SweepSpec {
  std::string name;
  SweepScenario scenario;
  SweepTarget variable;
  double lo = 0.0;
  double hi = kPi;
  int steps = 512;
  std::vector<DerivedRule> rules;
};

// Throws kInvalidSpec.
void validate(const SweepSpec& spec);

// k grids are cell-centred (lo + (i + 1/2) h) so they never touch 0 or pi;
// every other variable uses the inclusive grid lo + i (hi - lo)/(steps - 1).
std::vector<double> sweep_grid(const SweepSpec& spec);

// Applies rules in order; channels must be in a, b, c order.
void apply_derived_rules(const std::vector<DerivedRule>& rules, NodeSpec& node,
                         std::vector<ChannelSpec>& channels);

// Scenario with the sweep value and all derived rules applied.
SweepScenario scenario_at(const SweepSpec& spec, double value);

struct SweepRecord {
  std::size_t index = 0;
  double value = 0.0;
  double energy = 0.0;
  // ok | closed:<labels> | band-edge | pole | singular
  std::string status;
  bool computed = false;
  bool lossless = true;  // all gamma_i = 0 at this point
  Eigen::MatrixXd flows;        // NaN columns for closed or unrecorded incidents
  Eigen::MatrixXcd amplitudes;  // same masking
  std::vector<ChannelStatus> statuses;
  double conservation_residual = 0.0;  // over recorded columns
  double max_column_sum = 0.0;
};

// Thread count from CRW_THREADS, else the hardware concurrency.
unsigned default_thread_count();

// Output is identical for any thread count.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec, unsigned threads = 0);

// Lossless records: every recorded column sums to 1 within tol. Dissipative
// records: no column exceeds 1 + tol.
bool passes_conservation_audit(const SweepRecord& r, double tol = 1e-9);

std::vector<std::string> figure_ids();
// Throws kUnknownFigure.
SweepSpec reproduce_figure(std::string_view id, int steps = 512);

}  // namespace crw
