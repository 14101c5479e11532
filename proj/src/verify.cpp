#include "crw/verify.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>

#include "crw/oracle.hpp"
#include "crw/threeport.hpp"
#include "crw/twoport.hpp"

namespace crw {

namespace {

constexpr double kAmplitudeTol = 1e-10;
constexpr double kConservationTol = 1e-9;
constexpr double kWavepacketTol = 2e-2;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Draws until the closed form is defined (not at a pole or exact resonance).
template <class Fn>
void for_each_draw(Topology t, std::mt19937_64& rng, bool lossless, int draws, Fn&& fn) {
  int done = 0;
  while (done < draws) {
    const auto sc = random_scenario(t, rng, lossless);
    try {
      const auto closed = smatrix(sc.k, sc.incident, sc.node, sc.channels);
      fn(sc, closed);
      ++done;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPoleAtMechanicalResonance &&
          e.code() != ErrorCode::kSingularNodeMatrix && e.code() != ErrorCode::kBandEdge)
        throw;
    }
  }
}

CheckResult check(std::string name, double residual, double tol) {
  return {std::move(name), residual, tol, residual <= tol};
}

}  // namespace

RandomScenario random_scenario(Topology t, std::mt19937_64& rng, bool lossless) {
  RandomScenario s;
  auto j = [&] { return uniform(rng, 0.1, 2.5); };
  auto d = [&] { return uniform(rng, -2.5, 2.5); };
  const double phi = uniform(rng, 0.0, 2.0 * kPi);
  switch (t) {
    case Topology::kTwoPort: {
      TwoPortParams p{j(), j(), j(), j(), d(), d(), 0.0, 0.0, phi};
      if (!lossless) {
        p.gamma1 = uniform(rng, 0.0, 4.0);
        p.gamma2 = uniform(rng, 0.0, 4.0);
      }
      s.node = make_node(p);
      s.channels = make_channels(1.0, uniform(rng, 0.6, 1.6));
      break;
    }
    case Topology::kCirculatorTwoModes:
      s.node = make_node(CirculatorTwoModesParams{j(), j(), j(), j(), j(), d(), d(), phi});
      s.channels = make_channels(1.0, uniform(rng, 0.6, 1.6), uniform(rng, 0.6, 1.6));
      break;
    case Topology::kCirculatorThreeModes:
      s.node = make_node(CirculatorThreeModesParams{j(), j(), j(), j(), j(), j(), d(), d(), d(), phi});
      s.channels = make_channels(1.0, uniform(rng, 0.6, 1.6), uniform(rng, 0.6, 1.6));
      break;
  }
  s.incident = channel_at(std::uniform_int_distribution<std::size_t>(0, s.channels.size() - 1)(rng));
  s.k = uniform(rng, 0.05 * kPi, 0.95 * kPi);
  return s;
}

double max_amplitude_difference(const ScatteringResult& x, const ScatteringResult& y) {
  double worst = 0.0;
  for (std::size_t in = 0; in < x.size(); ++in) {
    if (!x.statuses[in].is_open()) continue;
    for (std::size_t out = 0; out < x.size(); ++out) {
      const auto o = static_cast<Eigen::Index>(out);
      const auto i = static_cast<Eigen::Index>(in);
      const double scale = std::max(1.0, std::abs(y.amplitudes(o, i)));
      worst = std::max(worst, std::abs(x.amplitudes(o, i) - y.amplitudes(o, i)) / scale);
    }
  }
  return worst;
}

double unitarity_defect(const ScatteringResult& r) {
  const auto t = velocity_weighted_open_block(r);
  const Eigen::MatrixXcd defect = t.adjoint() * t - Eigen::MatrixXcd::Identity(t.rows(), t.cols());
  return defect.cwiseAbs().maxCoeff();
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

void VerifyReport::print(std::ostream& out) const {
  for (const auto& c : checks)
    out << fmt::format("{} {:<48} residual={:.3e} tol={:.1e}\n", c.passed ? "PASS" : "FAIL",
                       c.name, c.residual, c.tolerance);
  out << fmt::format("suite {}: {}\n", suite, passed() ? "PASS" : "FAIL");
}

VerifyReport verify_closed_vs_boundary(std::uint64_t seed, int draws) {
  VerifyReport rep{"closed-vs-boundary", {}};
  std::mt19937_64 rng(seed);
  for (auto t : {Topology::kTwoPort, Topology::kCirculatorTwoModes,
                 Topology::kCirculatorThreeModes}) {
    double worst = 0.0;
    for_each_draw(t, rng, false, draws, [&](const RandomScenario& sc, const ScatteringResult& c) {
      const auto b = solve_boundary_system(sc.k, sc.incident, sc.node, sc.channels);
      worst = std::max(worst, max_amplitude_difference(c, b));
    });
    rep.checks.push_back(
        check(fmt::format("{} x{} draws", to_string(t), draws), worst, kAmplitudeTol));
  }
  // Exactly on an undamped resonance, where only the boundary solver applies.
  auto node = make_node(TwoPortParams{1.0, 1.0, 1.2, 0.8, 0.0, 0.7, 0.0, 0.0, kPi / 2});
  const auto ch = make_channels(1.0, 1.0);
  const double e = node.mode_energy(Mode::d1);
  const auto b = solve_boundary_system_at_energy(e, node, ch);
  rep.checks.push_back(check("boundary solver at E = eps_1", b.conservation_residual(),
                             kConservationTol));
  return rep;
}

VerifyReport verify_conservation(std::uint64_t seed, int draws) {
  VerifyReport rep{"conservation", {}};
  std::mt19937_64 rng(seed);
  for (auto t : {Topology::kTwoPort, Topology::kCirculatorTwoModes,
                 Topology::kCirculatorThreeModes}) {
    double sums = 0.0;
    double unit = 0.0;
    for_each_draw(t, rng, true, draws, [&](const RandomScenario&, const ScatteringResult& r) {
      sums = std::max(sums, r.conservation_residual());
      unit = std::max(unit, unitarity_defect(r));
    });
    rep.checks.push_back(check(fmt::format("{} column sums x{}", to_string(t), draws), sums,
                               kConservationTol));
    rep.checks.push_back(check(fmt::format("{} unitarity x{}", to_string(t), draws), unit,
                               kConservationTol));
  }
  double excess = 0.0;
  for_each_draw(Topology::kTwoPort, rng, false, draws,
                [&](const RandomScenario&, const ScatteringResult& r) {
                  for (std::size_t l = 0; l < r.size(); ++l)
                    if (r.statuses[l].is_open())
                      excess = std::max(excess, r.column_sum(channel_at(l)) - 1.0);
                });
  rep.checks.push_back(check("two-port damped column sum <= 1", std::max(0.0, excess), 1e-12));

  std::vector<std::pair<std::string, CirculatorDesign>> designs;
  for (double phi : {kPi / 2, 3 * kPi / 2})
    for (double k : {kPi / 4, 3 * kPi / 4})
      designs.emplace_back(fmt::format("two-mode design phi={:.4f} k={:.4f}", phi, k),
                           design_circulator_two_modes(1.2, phi, k));
  for (auto& d : design_circulator_three_modes_equal(kPi / 3))
    designs.emplace_back(fmt::format("equal design k={:.4f}", d.k), d);
  for (double k : {0.1 * kPi, 0.2 * kPi, 0.8 * kPi, 0.9 * kPi})
    designs.emplace_back(fmt::format("tunable design k={:.4f}", k),
                         design_circulator_three_modes_at_k(k));
  for (const auto& [name, d] : designs) {
    const auto nd = d.node();
    const auto ch = d.channels();
    double worst = 0.0;
    for (Channel in : {Channel::a, Channel::b, Channel::c}) {
      const double k = in == Channel::a || in == Channel::b
                           ? d.k
                           : channel_status_from_energy(dispersion_energy(d.k, d.xi), d.xi_c)
                                 .wavenumber();
      worst = std::max(worst, smatrix(k, in, nd, ch).conservation_residual());
    }
    rep.checks.push_back(check(name, worst, kConservationTol));
  }
  return rep;
}

VerifyReport verify_wavepacket(bool with_trend) {
  VerifyReport rep{"wavepacket", {}};
  auto compare = [&](const std::string& name, const NodeSpec& node,
                     const std::vector<ChannelSpec>& ch, Channel in, double k, double sigma) {
    const auto closed = smatrix(k, in, node, ch);
    const auto sc = default_scenario(k, in, ch, sigma);
    const auto w = wavepacket_transmission(sc, in, node, ch);
    const auto col = closed.flows.col(static_cast<Eigen::Index>(index(in)));
    const double err = (w.flows - col).cwiseAbs().maxCoeff();
    rep.checks.push_back(check(fmt::format("{} sigma={}", name, sigma), err, kWavepacketTol));
    rep.checks.push_back(check(fmt::format("{} sigma={} norm drift", name, sigma), w.norm_drift, 1e-9));
    return err;
  };

  compare("decoupled two-port, from a",
          make_node(TwoPortParams{0, 0, 0, 0, 0, 0, 0, 0, 0}), make_channels(1, 1), Channel::a,
          kPi / 3, 20);
  const auto d = design_circulator_two_modes(1.2, kPi / 2, kPi / 4);
  const auto node = d.node();
  const auto ch = d.channels();
  const double kc =
      channel_status_from_energy(dispersion_energy(d.k, d.xi), d.xi_c).wavenumber();
  double err_a20 = 0.0;
  for (Channel in : {Channel::a, Channel::b, Channel::c}) {
    const double k = in == Channel::c ? kc : d.k;
    const double err =
        compare(fmt::format("two-mode circulator, from {}", to_string(in)), node, ch, in, k, 20);
    if (in == Channel::a) err_a20 = err;
  }
  if (with_trend) {
    const double err40 = compare("two-mode circulator, from a", node, ch, Channel::a, d.k, 40);
    rep.checks.push_back({"error shrinks from sigma=20 to sigma=40 (ratio)", err40 / err_a20, 1.0,
                          err40 < err_a20});
  }
  // The damped converter has no time-domain model; the boundary solver is its oracle.
  const auto conv =
      make_node(TwoPortParams{1, 1, 4, 4, 0, 0, 0, optimal_damping(4.0), kPi / 2});
  const auto c2 = make_channels(1, 1);
  rep.checks.push_back(check("converter closed vs boundary (damped)",
                             max_amplitude_difference(smatrix(kPi / 4, Channel::a, conv, c2),
                                                      solve_boundary_system(kPi / 4, Channel::a,
                                                                            conv, c2)),
                             kAmplitudeTol));
  return rep;
}

}  // namespace crw
