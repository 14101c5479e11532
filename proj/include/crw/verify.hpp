#pragma once

// Self-check suites: randomized cross-checks of the closed forms against the
// boundary solver, flux conservation audits and wavepacket comparisons.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "crw/core.hpp"

namespace crw {

struct RandomScenario {
  NodeSpec node;
  std::vector<ChannelSpec> channels;
  Channel incident = Channel::a;
  double k = kPi / 2;
};

// Admissible random draw: J in [0.1, 2.5], Delta in [-2.5, 2.5], phi in
// [0, 2pi), xi_a = 1, other xi in [0.6, 1.6], k in [0.05pi, 0.95pi]; gamma in
// [0, 4] for the two-port unless `lossless`.
RandomScenario random_scenario(Topology t, std::mt19937_64& rng, bool lossless);

// Largest |x - y| / max(1, |y|) over open incident columns.
double max_amplitude_difference(const ScatteringResult& x, const ScatteringResult& y);

// max |T^dagger T - 1| of the velocity-weighted open block.
double unitarity_defect(const ScatteringResult& r);

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const;
  void print(std::ostream& out) const;
};

VerifyReport verify_closed_vs_boundary(std::uint64_t seed, int draws = 1000);
VerifyReport verify_conservation(std::uint64_t seed, int draws = 1000);
// sigma = 20 comparisons, plus the sigma = 40 trend when `with_trend`.
VerifyReport verify_wavepacket(bool with_trend = true);

}  // namespace crw
