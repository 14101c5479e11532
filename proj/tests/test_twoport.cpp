#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crw/oracle.hpp"
#include "crw/twoport.hpp"
#include "crw/verify.hpp"
#include "support/fixtures.hpp"
#include "support/hp_oracle.hpp"

using namespace crw;
using fixtures::flow;

namespace {

const auto kChannels = make_channels(1.0, 1.0);

ScatteringResult at_k(const NodeSpec& n, double k, std::span<const ChannelSpec> ch = kChannels) {
  return smatrix_two_port_at_energy(incident_energy(k, Channel::a, ch), n, ch);
}

}  // namespace

TEST(OptimalDamping, Values) {
  EXPECT_DOUBLE_EQ(optimal_damping(0.0), std::sqrt(2.0));
  EXPECT_NEAR(optimal_damping(4.0), std::sqrt(514.0), 1e-13);
  EXPECT_NEAR(optimal_damping(4.0), 22.6716, 1e-4);
  EXPECT_NEAR(optimal_damping(2.0), std::sqrt(34.0), 1e-14);
  EXPECT_NEAR(optimal_damping(8.0, 2.0), 2.0 * std::sqrt(514.0), 1e-12);
}

TEST(EffectiveTwoPort, MatchesHighPrecisionOracle) {
  const auto node = fixtures::converter(kPi / 2);
  const auto p = effective_two_port(-std::sqrt(2.0), node);

  const hp::Real e = -sqrt(hp::Real(2));
  const hp::Complex j_ba = hp::expi(-hp::pi() / 2) / e + hp::Complex(16) / hp::Complex(e, sqrt(hp::Real(514)));
  const hp::Complex j_ab = hp::expi(hp::pi() / 2) / e + hp::Complex(16) / hp::Complex(e, sqrt(hp::Real(514)));
  EXPECT_NEAR(p.j_ba.real(), static_cast<double>(j_ba.real()), 1e-15);
  EXPECT_NEAR(p.j_ba.imag(), static_cast<double>(j_ba.imag()), 1e-15);
  EXPECT_NEAR(p.j_ab.real(), static_cast<double>(j_ab.real()), 1e-15);
  EXPECT_NEAR(p.j_ab.imag(), static_cast<double>(j_ab.imag()), 1e-15);

  // Hand-rounded reference values; the 50-digit evaluation above is the real check.
  EXPECT_NEAR(p.j_ba.real(), -0.043846, 1e-5);
  EXPECT_NEAR(p.j_ba.imag(), 0.004100, 2e-5);
  EXPECT_NEAR(std::abs(p.j_ab), 1.4108, 5e-5);
  EXPECT_NEAR(std::abs(p.j_ba), 0.0440, 5e-5);

  const auto lifted = hp::lift(node);
  const hp::Complex da = hp::effective_coupling(lifted, e, 0, 0);
  EXPECT_NEAR(p.delta_a.real(), static_cast<double>(da.real()), 1e-14);
  EXPECT_NEAR(p.delta_a.imag(), static_cast<double>(da.imag()), 1e-14);
}

TEST(EffectiveTwoPort, PhaseFreeSymmetryAndPhaseReversal) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    auto s = random_scenario(Topology::kTwoPort, rng, true);
    const double e = u(rng);
    s.node.phi = 0.0;
    const auto p0 = effective_two_port(e, s.node);
    EXPECT_EQ(p0.j_ab, p0.j_ba);
    EXPECT_EQ(p0.j_ab.imag(), 0.0);

    s.node.phi = 1.3;
    const auto plus = effective_two_port(e, s.node);
    s.node.phi = 2 * kPi - 1.3;
    const auto minus = effective_two_port(e, s.node);
    EXPECT_NEAR(std::abs(plus.j_ab - minus.j_ba), 0.0, 1e-12 * std::max(1.0, std::abs(plus.j_ab)));
  }
}

TEST(EffectiveTwoPort, PoleAtUndampedResonance) {
  TwoPortParams p;
  p.delta1 = 0.5;  // eps_1 = -0.5
  const auto node = make_node(p);
  try {
    effective_two_port(-0.5, node);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPoleAtMechanicalResonance);
  }
  p.gamma1 = 0.3;
  EXPECT_NO_THROW(effective_two_port(-0.5, make_node(p)));
}

TEST(SmatrixTwoPort, DecoupledChains) {
  TwoPortParams p;
  p.j_a1 = p.j_b1 = p.j_a2 = p.j_b2 = 0.0;
  const auto node = make_node(p);
  for (double k : {0.3, 1.0, 2.5}) {
    const auto r = at_k(node, k);
    EXPECT_NEAR(std::abs(r.s(Channel::a, Channel::a) + std::exp(cplx(0, 2 * k))), 0.0, 1e-15);
    EXPECT_EQ(r.s(Channel::b, Channel::a), cplx(0.0));
    EXPECT_NEAR(flow(r, 'a', 'a'), 1.0, 1e-15);
  }
}

TEST(SmatrixTwoPort, ConverterDipAtQuarterPi) {
  const auto r = at_k(fixtures::converter(kPi / 2), kPi / 4);
  EXPECT_GT(flow(r, 'a', 'b'), 0.9);
  EXPECT_LT(flow(r, 'b', 'a'), 1e-2);
  const auto o = hp::scatter(fixtures::converter(kPi / 2), kChannels, -sqrt(hp::Real(2)));
  EXPECT_NEAR(flow(r, 'a', 'b'), o.flows(0, 1), 1e-12);
  EXPECT_NEAR(flow(r, 'b', 'a'), o.flows(1, 0), 1e-12);
}

TEST(SmatrixTwoPort, DetunedConverterAnchor) {
  const auto node = fixtures::converter(kPi / 2, 2 * fixtures::kSqrt2);
  const auto r = at_k(node, kPi / 4);
  EXPECT_NEAR(flow(r, 'b', 'a'), 0.258, 5e-3);
  EXPECT_LE(flow(r, 'a', 'b'), 1e-3);

  const auto o = hp::scatter(node, kChannels, -sqrt(hp::Real(2)));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(r.flows(i, j), o.flows(i, j), 1e-12);
      EXPECT_NEAR(std::abs(r.amplitudes(i, j) - o.amplitudes(i, j)), 0.0, 1e-12);
    }
}

TEST(SmatrixTwoPort, DetuningMirror) {
  const auto plus = at_k(fixtures::converter(kPi / 2, 2 * fixtures::kSqrt2), kPi / 4);
  const auto minus = at_k(fixtures::converter(kPi / 2, -2 * fixtures::kSqrt2), 3 * kPi / 4);
  EXPECT_NEAR(flow(plus, 'b', 'a'), flow(minus, 'a', 'b'), 1e-12);
  EXPECT_NEAR(flow(plus, 'a', 'b'), flow(minus, 'b', 'a'), 1e-12);
  EXPECT_NEAR(flow(plus, 'a', 'a'), flow(minus, 'b', 'b'), 1e-12);
}

TEST(SmatrixTwoPort, ConverterPointsPredictDirection) {
  const auto points = optimal_converter_points();
  ASSERT_EQ(points.size(), 4u);
  bool has_first = false, has_last = false;
  for (const auto& pt : points) {
    has_first |= pt.phi == kPi / 2 && pt.k == kPi / 4;
    has_last |= pt.phi == 3 * kPi / 2 && pt.k == 3 * kPi / 4;
    const auto r = at_k(fixtures::converter(pt.phi), pt.k);
    const double ab = flow(r, 'a', 'b');
    const double ba = flow(r, 'b', 'a');
    if (pt.dominant == ConversionDirection::kBToA) {
      EXPECT_GT(ab, 0.9);
      EXPECT_LT(ba, 1e-2);
    } else {
      EXPECT_GT(ba, 0.9);
      EXPECT_LT(ab, 1e-2);
    }
  }
  EXPECT_TRUE(has_first && has_last);
  EXPECT_EQ(points[0].dominant, ConversionDirection::kBToA);
  EXPECT_EQ(to_string(points[0].dominant), "b->a dominant, a->b suppressed");
}

TEST(SmatrixTwoPort, ReciprocityAtTrivialPhase) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    auto s = random_scenario(Topology::kTwoPort, rng, i % 2 == 0);
    s.channels = make_channels(1.0, 1.0);
    for (double phi : {0.0, kPi}) {
      s.node.phi = phi;
      for (int j = 1; j < 16; ++j) {
        const auto r = at_k(s.node, kPi * j / 16.0, s.channels);
        EXPECT_NEAR(flow(r, 'a', 'b'), flow(r, 'b', 'a'), 1e-12);
      }
    }
  }
}

TEST(SmatrixTwoPort, PhaseReversalDuality) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
  for (int i = 0; i < 500; ++i) {
    auto s = random_scenario(Topology::kTwoPort, rng, i % 3 == 0);
    const double phi = phase(rng);
    s.node.phi = phi;
    const auto fwd = smatrix_two_port(s.k, s.incident, s.node, s.channels);
    s.node.phi = 2 * kPi - phi;
    const auto rev = smatrix_two_port(s.k, s.incident, s.node, s.channels);
    if (fwd.is_open(Channel::a) && fwd.is_open(Channel::b)) {
      EXPECT_NEAR(flow(rev, 'a', 'b'), flow(fwd, 'b', 'a'), 1e-12);
      EXPECT_NEAR(flow(rev, 'b', 'a'), flow(fwd, 'a', 'b'), 1e-12);
    }
  }
}

TEST(SmatrixTwoPort, ConservationWithAndWithoutLoss) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const bool lossless = i % 2 == 0;
    const auto s = random_scenario(Topology::kTwoPort, rng, lossless);
    const auto r = smatrix_two_port(s.k, s.incident, s.node, s.channels);
    const double sum = r.column_sum(s.incident);
    for (int l = 0; l < 2; ++l)
      if (r.is_open(channel_at(static_cast<std::size_t>(l))))
        EXPECT_GE(r.flows(l, static_cast<int>(index(s.incident))), 0.0);
    if (lossless)
      EXPECT_NEAR(sum, 1.0, 1e-12);
    else
      EXPECT_LE(sum, 1.0 + 1e-12);
  }
}

TEST(SmatrixTwoPort, ClosedPartnerArmReflectsEverything) {
  const auto channels = make_channels(1.0, 0.3);
  const auto node = make_node(TwoPortParams{.phi = 0.4});
  const auto r = smatrix_two_port(kPi / 3, Channel::a, node, channels);
  EXPECT_FALSE(r.is_open(Channel::b));
  EXPECT_NEAR(flow(r, 'a', 'a'), 1.0, 1e-12);
  EXPECT_EQ(flow(r, 'b', 'a'), 0.0);
  EXPECT_TRUE(std::isnan(r.flows(0, 1)));
  EXPECT_THROW(flow(r, 'a', 'b'), Error);
}

TEST(SmatrixTwoPort, MatchesHighPrecisionOracleOnRandomDraws) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 60; ++i) {
    const auto s = random_scenario(Topology::kTwoPort, rng, i % 2 == 0);
    const auto r = smatrix_two_port(s.k, s.incident, s.node, s.channels);
    const hp::Real k(s.k);
    const hp::Real e = -2 * hp::Real(find_channel(s.channels, s.incident).xi) * cos(k);
    const auto o = hp::scatter(s.node, s.channels, e);
    const int in = static_cast<int>(index(s.incident));
    for (int l = 0; l < 2; ++l) {
      const cplx ref = o.amplitudes(l, in);
      EXPECT_LE(std::abs(r.amplitudes(l, in) - ref), 1e-11 * std::max(1.0, std::abs(ref))) << i;
      if (r.is_open(channel_at(static_cast<std::size_t>(l)))) EXPECT_NEAR(r.flows(l, in), o.flows(l, in), 1e-11);
    }
  }
}

TEST(SmatrixTwoPort, EqualsBoundarySolver) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_scenario(Topology::kTwoPort, rng, false);
    const auto x = smatrix_two_port(s.k, s.incident, s.node, s.channels);
    const auto y = solve_boundary_system(s.k, s.incident, s.node, s.channels);
    EXPECT_LT(max_amplitude_difference(x, y), 1e-10) << i;
  }
}
