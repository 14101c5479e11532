#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "crw/core.hpp"
#include "support/fixtures.hpp"

using namespace crw;

namespace {

void expect_error(ErrorCode code, auto&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected error " << reason_code(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Dispersion, BandCentreIsHalfPi) {
  const auto s = channel_status_from_energy(0.0, 1.0);
  ASSERT_TRUE(s.is_open());
  EXPECT_DOUBLE_EQ(s.wavenumber(), kPi / 2);
  EXPECT_NEAR(dispersion_energy(kPi / 2, 1.0), 0.0, 1e-15);
}

TEST(Dispersion, OutputArmWavenumberFollowsSharedEnergy) {
  const double xi_c = 1.2397;
  const auto s = channel_status_from_energy(-std::sqrt(2.0), xi_c);
  ASSERT_TRUE(s.is_open());
  const double expected = std::acos(std::sqrt(2.0) / (2 * xi_c));
  EXPECT_NEAR(s.wavenumber(), expected, 1e-15);
  EXPECT_NEAR(dispersion_energy(s.wavenumber(), xi_c), -std::sqrt(2.0), 1e-14);
}

TEST(Dispersion, EvanescentRootAboveBand) {
  const auto s = channel_status_from_energy(-3.0, 1.0);
  ASSERT_EQ(s.kind(), ChannelStatus::Kind::kEvanescent);
  const double z = s.phase_factor().real();
  EXPECT_NEAR(std::abs(z), 1.5 - std::sqrt(5.0) / 2, 1e-15);
  EXPECT_NEAR(z + 1 / z, 3.0, 1e-14);
  EXPECT_GT(s.decay(), 0.0);
}

TEST(Dispersion, EvanescentRootPropertyOnGrid) {
  for (double xi : {0.6, 1.0, 1.7}) {
    for (int i = 1; i <= 400; ++i) {
      const double mag = 2 * xi * (1.0 + 1e-6 + 0.02 * i);
      for (double e : {mag, -mag}) {
        const auto s = channel_status_from_energy(e, xi);
        ASSERT_EQ(s.kind(), ChannelStatus::Kind::kEvanescent) << e;
        const cplx z = s.phase_factor();
        EXPECT_LT(std::abs(z), 1.0);
        EXPECT_NEAR(xi * (z + 1.0 / z).real(), -e, 1e-12 * std::max(1.0, std::abs(e)));
        EXPECT_EQ(z.imag(), 0.0);
      }
    }
  }
}

TEST(Dispersion, BandEdgeClassification) {
  for (double xi : {0.5, 1.0, 2.0}) {
    for (double e : {2 * xi, -2 * xi, 2 * xi * (1 + 2e-10), -2 * xi * (1 - 2e-10)})
      EXPECT_EQ(channel_status_from_energy(e, xi).kind(), ChannelStatus::Kind::kBandEdge) << e;
    EXPECT_EQ(channel_status_from_energy(2 * xi * (1 - 1e-8), xi).kind(),
              ChannelStatus::Kind::kPropagating);
    EXPECT_EQ(channel_status_from_energy(2 * xi * (1 + 1e-8), xi).kind(),
              ChannelStatus::Kind::kEvanescent);
  }
}

TEST(Dispersion, RoundTripInterior) {
  constexpr double delta = 1e-3;
  for (double xi : {0.6, 1.0, 1.6}) {
    for (int i = 0; i <= 20000; ++i) {
      const double k = delta + (kPi - 2 * delta) * i / 20000.0;
      const auto s = channel_status_from_energy(dispersion_energy(k, xi), xi);
      ASSERT_TRUE(s.is_open());
      EXPECT_NEAR(s.wavenumber(), k, 1e-12);
    }
  }
}

// acos amplifies the rounding of E by 1/sin k, so near the edge the bound is
// scaled by the conditioning rather than fixed. Wavenumbers whose energy lies
// within the band-edge tolerance (k below ~4.5e-5) must classify as BandEdge.
TEST(Dispersion, RoundTripNearBandEdgeWithinConditioning) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  int edge = 0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = std::pow(10.0, -6.0 + 3.0 * i / 2000.0);
    for (double k : {t, kPi - t}) {
      const double e = dispersion_energy(k, 1.0);
      const auto s = channel_status_from_energy(e, 1.0);
      const double gap = 2.0 - std::abs(e);
      if (gap <= 0.99e-9) {
        EXPECT_EQ(s.kind(), ChannelStatus::Kind::kBandEdge) << k;
        ++edge;
      } else if (gap > 1.01e-9) {
        ASSERT_TRUE(s.is_open()) << k;
        EXPECT_LE(std::abs(s.wavenumber() - k), std::max(1e-12, 8 * eps / std::sin(k))) << k;
      }
    }
  }
  EXPECT_GT(edge, 0);
}

TEST(GroupVelocity, Values) {
  EXPECT_DOUBLE_EQ(group_velocity(kPi / 2, 1.0), 1.0);
  EXPECT_NEAR(group_velocity(kPi / 4, 1.0), std::sqrt(2.0) / 2, 2e-16);
  expect_error(ErrorCode::kVelocityUndefined, [] { group_velocity(0.0, 1.0); });
  expect_error(ErrorCode::kVelocityUndefined,
               [] { group_velocity(channel_status_from_energy(-3.0, 1.0), 1.0); });
}

TEST(Flows, DecoupledFullReflection) {
  const auto channels = make_channels(1.0, 1.0);
  const double k = 0.7;
  const auto st = statuses_at(dispersion_energy(k, 1.0), channels);
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2, 2);
  s(0, 0) = s(1, 1) = -std::exp(cplx(0, 2 * k));
  const auto col = flows_from_amplitudes(s, st, channels, Channel::a);
  EXPECT_NEAR(col(0), 1.0, 1e-15);
  EXPECT_EQ(col(1), 0.0);
}

TEST(Flows, EqualVelocitiesGiveSquaredModulus) {
  const auto channels = make_channels(1.0, 1.0);
  const auto st = statuses_at(dispersion_energy(1.1, 1.0), channels);
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2, 2);
  s(1, 0) = std::polar(std::sqrt(0.5), 0.3);
  s(0, 0) = std::polar(std::sqrt(0.5), -1.2);
  const auto col = flows_from_amplitudes(s, st, channels, Channel::a);
  EXPECT_NEAR(col(1), 0.5, 1e-15);
  EXPECT_NEAR(col(0), 0.5, 1e-15);
}

TEST(Flows, VelocityWeightingAndClosedRows) {
  // a and b open with different velocities, c closed.
  const auto channels = make_channels(1.0, 1.5, 0.5);
  const double e = dispersion_energy(1.0, 1.0);
  const auto st = statuses_at(e, channels);
  ASSERT_TRUE(st[0].is_open() && st[1].is_open());
  ASSERT_EQ(st[2].kind(), ChannelStatus::Kind::kEvanescent);
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Constant(3, 3, cplx(0.3, 0.4));
  const auto col = flows_from_amplitudes(s, st, channels, Channel::a);
  const double va = group_velocity(st[0], 1.0);
  const double vb = group_velocity(st[1], 1.5);
  EXPECT_NEAR(col(0), 0.25, 1e-15);
  EXPECT_NEAR(col(1), 0.25 * vb / va, 1e-15);
  EXPECT_EQ(col(2), 0.0);
  for (int i = 0; i < 3; ++i) EXPECT_GE(col(i), 0.0);
  expect_error(ErrorCode::kIncidentClosed, [&] { flows_from_amplitudes(s, st, channels, Channel::c); });
}

TEST(IncidentEnergy, RejectsBandEdges) {
  const auto channels = make_channels(1.0, 1.0);
  expect_error(ErrorCode::kBandEdge, [&] { incident_energy(0.0, Channel::a, channels); });
  expect_error(ErrorCode::kBandEdge, [&] { incident_energy(kPi, Channel::a, channels); });
  expect_error(ErrorCode::kBandEdge, [&] { incident_energy(1e-12, Channel::b, channels); });
  expect_error(ErrorCode::kDomain, [&] { incident_energy(-0.1, Channel::a, channels); });
  EXPECT_NEAR(incident_energy(kPi / 4, Channel::a, channels), -std::sqrt(2.0), 1e-15);
}

TEST(NodeValidation, TopologyEdgeSets) {
  auto n = make_node(TwoPortParams{});
  EXPECT_NO_THROW(validate(n));
  n.edges.push_back({Channel::c, Mode::d1, 1.0, false});
  expect_error(ErrorCode::kInvalidSpec, [&] { validate(n); });

  auto c = make_node(CirculatorTwoModesParams{});
  EXPECT_NO_THROW(validate(c));
  c.mode(Mode::d1).gamma = 0.1;
  expect_error(ErrorCode::kInvalidSpec, [&] { validate(c); });

  auto t = make_node(CirculatorThreeModesParams{});
  EXPECT_NO_THROW(validate(t, make_channels(1, 1, 1)));
  expect_error(ErrorCode::kInvalidSpec, [&] { validate(t, make_channels(1, 1)); });
}

TEST(NodeValidation, ModeEnergySign) {
  auto n = make_node(TwoPortParams{.delta1 = 0.7});
  EXPECT_EQ(n.mode_energy(Mode::d1), -0.7);
  n.mode_energy_sign = ModeEnergySign::kPlusDelta;
  EXPECT_EQ(n.mode_energy(Mode::d1), 0.7);
}

TEST(Labels, ParseAndPrint) {
  for (auto ch : {Channel::a, Channel::b, Channel::c}) EXPECT_EQ(parse_channel(to_string(ch)), ch);
  for (auto m : {Mode::d1, Mode::d2, Mode::d3}) EXPECT_EQ(parse_mode(to_string(m)), m);
  for (auto t : {Topology::kTwoPort, Topology::kCirculatorTwoModes, Topology::kCirculatorThreeModes})
    EXPECT_EQ(parse_topology(to_string(t)), t);
  EXPECT_FALSE(parse_channel("d"));
  EXPECT_TRUE(is_physics_error(ErrorCode::kBandEdge));
  EXPECT_FALSE(is_physics_error(ErrorCode::kConfig));
}
