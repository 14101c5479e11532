#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "crw/sweep.hpp"
#include "crw/threeport.hpp"
#include "crw/twoport.hpp"

using namespace crw;

namespace {

void expect_invalid(const SweepSpec& spec) {
  try {
    validate(spec);
    ADD_FAILURE() << "spec accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSpec) << e.what();
  }
}

bool bitwise_equal(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return x.size() == y.size() && std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
}

SweepSpec circulator_k_sweep(double xi_c) {
  SweepSpec s;
  s.name = "test";
  s.scenario.node = make_node(CirculatorTwoModesParams{.phi = kPi / 2});
  s.scenario.channels = make_channels(1.0, 1.0, xi_c);
  s.variable = {SweepVariable::kK};
  s.steps = 256;
  return s;
}

}  // namespace

TEST(SweepGrid, CellCentredForWavenumber) {
  SweepSpec s = circulator_k_sweep(1.0);
  s.steps = 4;
  const auto g = sweep_grid(s);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_DOUBLE_EQ(g.front(), kPi / 8);
  EXPECT_DOUBLE_EQ(g.back(), 7 * kPi / 8);

  s.variable = {SweepVariable::kDelta1};
  s.lo = -4;
  s.hi = 4;
  s.steps = 5;
  const auto d = sweep_grid(s);
  EXPECT_EQ(d, (std::vector<double>{-4, -2, 0, 2, 4}));
}

TEST(SweepTarget, RoundTrip) {
  for (const char* name : {"k", "delta1", "delta2", "delta3", "phi", "J_c2", "J_a1"}) {
    const auto t = parse_sweep_target(name);
    ASSERT_TRUE(t) << name;
    EXPECT_EQ(to_string(*t), name);
  }
  EXPECT_FALSE(parse_sweep_target("J_d1"));
  EXPECT_FALSE(parse_sweep_target("gamma"));
  for (auto k : {DerivedRuleKind::kOptimalDamping, DerivedRuleKind::kCirculatorTwoModeDesign,
                 DerivedRuleKind::kDelta3FollowsDelta2})
    EXPECT_EQ(parse_derived_rule(to_string(k)), k);
}

TEST(SweepValidation, RejectsBadSpecs) {
  auto base = circulator_k_sweep(1.0);
  EXPECT_NO_THROW(validate(base));

  auto s = base;
  s.steps = 1;
  expect_invalid(s);

  s = base;
  s.lo = 1.0;
  s.hi = 1.0;
  expect_invalid(s);

  s = base;
  s.hi = 4.0;
  expect_invalid(s);

  s = base;
  s.variable = {SweepVariable::kDelta3};
  s.lo = -1;
  s.hi = 1;
  expect_invalid(s);

  s = base;
  s.rules = {{DerivedRuleKind::kCirculatorTwoModeDesign}};
  s.variable = {SweepVariable::kCoupling, Channel::c, Mode::d2};
  s.lo = 0.5;
  s.hi = 2.0;
  expect_invalid(s);

  s = base;
  s.rules = {{DerivedRuleKind::kOptimalDamping}};
  expect_invalid(s);

  s = base;
  s.variable = {SweepVariable::kCoupling, Channel::c, Mode::d1};
  s.lo = 0.1;
  s.hi = 1.0;
  expect_invalid(s);

  s = base;
  s.scenario.incident = Channel::c;
  s.scenario.channels.pop_back();
  expect_invalid(s);
}

TEST(SweepValidation, FixedRuleVariableCannotBeSwept) {
  auto s = reproduce_figure("fig9d", 16);
  EXPECT_NO_THROW(validate(s));
  s.variable = {SweepVariable::kDelta3};
  expect_invalid(s);
}

TEST(RunSweep, DeterministicAcrossThreadCounts) {
  const auto spec = reproduce_figure("fig5b", 300);
  const auto one = run_sweep(spec, 1);
  for (unsigned t : {2u, 3u, 7u}) {
    const auto many = run_sweep(spec, t);
    ASSERT_EQ(many.size(), one.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      EXPECT_EQ(many[i].index, i);
      EXPECT_EQ(many[i].status, one[i].status);
      EXPECT_EQ(std::memcmp(&many[i].value, &one[i].value, sizeof(double)), 0);
      EXPECT_TRUE(bitwise_equal(many[i].flows, one[i].flows)) << i;
    }
  }
}

TEST(RunSweep, ClosedChannelRuleAcrossBandEdge) {
  // xi_c = 0.5: arm c is closed whenever |E| > 1.
  auto spec = circulator_k_sweep(0.5);
  const auto recs = run_sweep(spec, 2);
  int closed = 0, open = 0;
  for (const auto& r : recs) {
    ASSERT_TRUE(r.computed) << r.status;
    if (r.status == "closed:c") {
      ++closed;
      EXPECT_TRUE(std::isnan(r.flows(0, 2)));
      EXPECT_EQ(r.flows(2, 0), 0.0);
      EXPECT_NEAR(r.flows(0, 0) + r.flows(1, 0), 1.0, 1e-9);
    } else {
      EXPECT_EQ(r.status, "ok");
      ++open;
    }
    EXPECT_TRUE(passes_conservation_audit(r));
  }
  EXPECT_GT(closed, 0);
  EXPECT_GT(open, 0);
}

TEST(RunSweep, PoleAndBandEdgePointsAreFlagged) {
  SweepSpec s;
  s.scenario.node = make_node(TwoPortParams{.delta1 = 0.0, .delta2 = 0.5});
  s.scenario.channels = make_channels(1, 1);
  s.scenario.k = kPi / 2;  // E = 0 = eps_1 when delta1 = 0
  s.variable = {SweepVariable::kDelta1};
  s.lo = -1;
  s.hi = 1;
  s.steps = 3;
  const auto recs = run_sweep(s, 1);
  EXPECT_EQ(recs[1].status, "pole");
  EXPECT_FALSE(recs[1].computed);
  EXPECT_EQ(recs[0].status, "ok");
}

TEST(Figures, IdsAndUnknown) {
  const auto ids = figure_ids();
  EXPECT_EQ(ids.size(), 38u);
  EXPECT_EQ(ids.front(), "fig2a");
  EXPECT_EQ(ids.back(), "fig10f");
  try {
    reproduce_figure("fig4a");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownFigure);
  }
}

TEST(Figures, ConverterPanelBindings) {
  const auto s = reproduce_figure("fig2c");
  EXPECT_EQ(s.steps, 512);
  EXPECT_EQ(s.variable.kind, SweepVariable::kK);
  const auto sc = scenario_at(s, 1.0);
  EXPECT_EQ(sc.node.phi, kPi / 2);
  EXPECT_EQ(sc.node.coupling(Channel::a, Mode::d1), 1.0);
  EXPECT_EQ(sc.node.coupling(Channel::a, Mode::d2), 4.0);
  EXPECT_EQ(sc.node.mode(Mode::d1).delta, 0.0);
  EXPECT_NEAR(sc.node.mode(Mode::d2).gamma, std::sqrt(514.0), 1e-12);
}

TEST(Figures, ConverterIsolationPeaksNearQuarterPi) {
  const auto recs = run_sweep(reproduce_figure("fig2a"), 2);
  const auto best = std::max_element(recs.begin(), recs.end(), [](const auto& x, const auto& y) {
    return x.flows(0, 1) < y.flows(0, 1);
  });
  EXPECT_NEAR(best->value, kPi / 4, 0.05 * kPi);
}

TEST(Figures, DetuningPanelBindings) {
  const auto s = reproduce_figure("fig6a");
  EXPECT_EQ(s.variable.kind, SweepVariable::kDelta1);
  EXPECT_EQ(s.scenario.k, kPi / 4);
  EXPECT_EQ(s.scenario.reference_channel(), Channel::a);
  const auto sc = scenario_at(s, 2 * std::sqrt(2.0));
  EXPECT_EQ(sc.node.phi, kPi / 2);
  EXPECT_EQ(sc.node.mode(Mode::d2).delta, 0.0);
  EXPECT_EQ(sc.node.coupling(Channel::b, Mode::d2), 1.2);
  EXPECT_NEAR(sc.node.coupling(Channel::c, Mode::d2), std::sqrt(3.0736), 1e-14);
}

TEST(Figures, TunableDesignPanelBindings) {
  const auto s = reproduce_figure("fig10a");
  EXPECT_EQ(s.variable.kind, SweepVariable::kK);
  const auto d = design_circulator_three_modes_at_k(0.1 * kPi);
  const auto sc = scenario_at(s, 0.5);
  EXPECT_EQ(sc.channels[2].xi, d.xi_c);
  EXPECT_EQ(sc.node.coupling(Channel::a, Mode::d1), d.coupling(Channel::a, Mode::d1));
}

TEST(Figures, BeamSplitterRecord) {
  auto s = reproduce_figure("fig9a");
  s.lo = std::sqrt(3.0);
  s.hi = 4.0;
  s.steps = 2;
  const auto recs = run_sweep(s, 1);
  ASSERT_TRUE(recs[0].computed);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!std::isnan(recs[0].flows(i, j))) EXPECT_NEAR(recs[0].flows(i, j), 1.0 / 3, 5e-3);
}

TEST(Figures, EveryRecordPassesAudit) {
  for (const auto& id : figure_ids()) {
    const auto recs = run_sweep(reproduce_figure(id), 2);
    EXPECT_EQ(recs.size(), 512u);
    for (const auto& r : recs) EXPECT_TRUE(passes_conservation_audit(r)) << id << " " << r.index;
  }
}
