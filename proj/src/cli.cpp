#include "crw/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "crw/angle.hpp"
#include "crw/config.hpp"
#include "crw/oracle.hpp"
#include "crw/report.hpp"
#include "crw/sweep.hpp"
#include "crw/threeport.hpp"
#include "crw/verify.hpp"

namespace crw {

namespace {

[[noreturn]] void usage_error(const std::string& msg) { fail(ErrorCode::kConfig, msg); }

Channel channel_arg(const std::string& s, const char* flag) {
  const auto ch = parse_channel(s);
  if (!ch) usage_error(fmt::format("{} must be a, b or c (got '{}')", flag, s));
  return *ch;
}

AngleUnit unit_arg(const std::string& s, AngleUnit fallback) {
  return s.empty() ? fallback : parse_angle_unit(s);
}

std::string pi_multiple(double x) { return fmt::format("{:.6f}pi", x / kPi); }

struct SmatrixOpts {
  std::string config, incident, k, angle_unit, backend = "closed", format = "text";
};

int cmd_smatrix(const SmatrixOpts& o, std::ostream& out) {
  auto cfg = load_config(o.config);
  try {
    apply_derived_rules(cfg.rules, cfg.node, cfg.channels);
    validate(cfg.node, cfg.channels);
  } catch (const Error& e) {
    usage_error(fmt::format("{}: derived rules: {}", o.config, e.what()));
  }
  const auto unit = unit_arg(o.angle_unit, cfg.angle_unit);
  std::optional<Channel> incident = cfg.incident;
  if (!o.incident.empty()) incident = channel_arg(o.incident, "--incident");
  if (!incident) usage_error("--incident is required (config has no incident channel)");
  std::optional<double> k = cfg.k;
  if (!o.k.empty()) k = parse_angle(o.k, unit);
  if (!k) usage_error("--k is required (config has no k)");

  const auto r = o.backend == "boundary"
                     ? solve_boundary_system(*k, *incident, cfg.node, cfg.channels)
                     : smatrix(*k, *incident, cfg.node, cfg.channels);
  if (o.format == "json")
    write_smatrix_json(out, r, cfg.node);
  else
    write_smatrix_text(out, r, cfg.node);
  return kExitOk;
}

struct SweepOpts {
  std::string config, var, from, to, out, format = "csv", incident, k, k_channel, angle_unit;
  int steps = 0;
  bool log10 = false;
};

std::string render(const std::string& format, const SweepSpec& spec,
                   const std::vector<SweepRecord>& records, bool log10) {
  std::ostringstream ss;
  if (format == "json")
    write_sweep_json(ss, spec, records, log10);
  else
    write_sweep_csv(ss, spec, records, log10);
  return ss.str();
}

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
  const auto cfg = load_config(o.config);
  const auto unit = unit_arg(o.angle_unit, cfg.angle_unit);
  SweepSpec spec;
  spec.name = std::filesystem::path(o.config).stem().string();
  spec.scenario.node = cfg.node;
  spec.scenario.channels = cfg.channels;
  spec.scenario.incident = cfg.incident;
  spec.scenario.k_channel = cfg.k_channel;
  spec.rules = cfg.rules;
  if (!o.incident.empty())
    spec.scenario.incident =
        o.incident == "all" ? std::nullopt : std::optional(channel_arg(o.incident, "--incident"));
  if (!o.k_channel.empty()) spec.scenario.k_channel = channel_arg(o.k_channel, "--k-channel");

  auto target = cfg.sweep.var;
  if (!o.var.empty()) {
    target = parse_sweep_target(o.var);
    if (!target) usage_error(fmt::format("--var: unknown sweep variable '{}'", o.var));
  }
  if (!target) usage_error("--var is required (config has no sweep.var)");
  spec.variable = *target;
  const bool angular = target->kind == SweepVariable::kK || target->kind == SweepVariable::kPhi;
  auto value = [&](const std::string& s) {
    return angular ? parse_angle(s, unit) : parse_angle(s, AngleUnit::kRadians);
  };
  std::optional<double> lo = cfg.sweep.from, hi = cfg.sweep.to;
  if (!o.from.empty()) lo = value(o.from);
  if (!o.to.empty()) hi = value(o.to);
  if (angular && target->kind == SweepVariable::kK) {
    if (!lo) lo = 0.0;
    if (!hi) hi = kPi;
  }
  if (!lo || !hi) usage_error("--from and --to are required for this variable");
  spec.lo = *lo;
  spec.hi = *hi;
  spec.steps = o.steps != 0 ? o.steps : cfg.sweep.steps.value_or(512);
  std::optional<double> k = cfg.k;
  if (!o.k.empty()) k = parse_angle(o.k, unit);
  if (target->kind != SweepVariable::kK) {
    if (!k) usage_error("a fixed --k is required when sweeping a variable other than k");
    spec.scenario.k = *k;
  }

  const auto records = run_sweep(spec);
  const auto text = render(o.format, spec, records, o.log10);
  if (o.out.empty())
    out << text;
  else
    write_file_atomic(o.out, text);
  return kExitOk;
}

struct DesignOpts {
  std::string topology, j2, phi, k, xi = "1", emit_config;
};

void emit_design_config(const CirculatorDesign& d, const std::string& path) {
  ScenarioConfig cfg;
  cfg.node = d.node();
  cfg.channels = d.channels();
  cfg.incident = Channel::a;
  cfg.k = d.k;
  write_file_atomic(path, to_yaml(cfg));
}

int cmd_design(const DesignOpts& o, std::ostream& out) {
  const double xi = parse_angle(o.xi, AngleUnit::kRadians);
  auto angle_or = [](const std::string& s, double fallback) {
    return s.empty() ? fallback : parse_angle(s, AngleUnit::kRadians);
  };
  std::vector<CirculatorDesign> designs;
  if (o.topology == "circ1") {
    if (o.j2.empty()) usage_error("circ1 requires --j2");
    const double j2 = parse_angle(o.j2, AngleUnit::kRadians);
    const auto d =
        design_circulator_two_modes(j2, angle_or(o.phi, kPi / 2), angle_or(o.k, kPi / 4), xi);
    out << fmt::format("J_c2={:.6f}, xi_c={:.6f}\n", d.coupling(Channel::c, Mode::d2), d.xi_c);
    designs.push_back(d);
  } else if (o.topology == "circ2-equal") {
    if (o.phi.empty()) usage_error("circ2-equal requires --phi");
    designs = design_circulator_three_modes_equal(parse_angle(o.phi), xi);
    for (const auto& d : designs)
      out << fmt::format("J={:.6f}, k={}\n", d.coupling(Channel::a, Mode::d1), pi_multiple(d.k));
  } else if (o.topology == "circ2-k") {
    if (o.k.empty()) usage_error("circ2-k requires --k");
    const auto d = design_circulator_three_modes_at_k(parse_angle(o.k), angle_or(o.phi, kPi / 2), xi);
    out << fmt::format("J1={:.6f}, J2={:.6f}, J3={:.6f}, xi_c={:.6f}\n",
                       d.coupling(Channel::a, Mode::d1), d.coupling(Channel::a, Mode::d2),
                       d.coupling(Channel::c, Mode::d2), d.xi_c);
    designs.push_back(d);
  } else {
    usage_error(fmt::format("--topology must be circ1, circ2-equal or circ2-k (got '{}')",
                            o.topology));
  }
  for (const auto& d : designs)
    out << fmt::format("phi={} k={} direction={}\n", pi_multiple(d.phi), pi_multiple(d.k),
                       to_string(d.direction));
  if (!o.emit_config.empty()) emit_design_config(designs.front(), o.emit_config);
  return kExitOk;
}

struct FigureOpts {
  std::string id, out, format = "csv";
  int steps = 512;
  bool log10 = false;
};

int cmd_figure(const FigureOpts& o, std::ostream& out) {
  namespace fs = std::filesystem;
  std::vector<std::string> ids = o.id == "all" ? figure_ids() : std::vector<std::string>{o.id};
  std::vector<SweepSpec> specs;
  for (const auto& id : ids) specs.push_back(reproduce_figure(id, o.steps));
  fs::create_directories(o.out);
  bool all_pass = true;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& spec : specs) {
    const auto t1 = std::chrono::steady_clock::now();
    const auto records = run_sweep(spec);
    std::size_t skipped = 0, failed = 0;
    for (const auto& r : records) {
      if (!r.computed) ++skipped;
      if (!passes_conservation_audit(r)) ++failed;
    }
    all_pass = all_pass && failed == 0;
    const auto ext = o.format == "json" ? ".json" : ".csv";
    write_file_atomic(fs::path(o.out) / (spec.name + ext), render(o.format, spec, records, o.log10));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    out << fmt::format("{}: {} records, {} skipped, audit {} ({:.3f} s)\n", spec.name,
                       records.size(), skipped, failed == 0 ? "PASS" : "FAIL", secs);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << fmt::format("{} figure datasets in {:.3f} s, audit {}\n", specs.size(), total,
                     all_pass ? "PASS" : "FAIL");
  return all_pass ? kExitOk : kExitPhysicsError;
}

struct VerifyOpts {
  std::string suite = "all";
  std::uint64_t seed = 7;
  int draws = 1000;
  bool quick = false;
};

int cmd_verify(const VerifyOpts& o, std::ostream& out) {
  std::vector<VerifyReport> reports;
  const bool all = o.suite == "all";
  if (!all && o.suite != "closed-vs-boundary" && o.suite != "conservation" &&
      o.suite != "wavepacket")
    usage_error(fmt::format("unknown suite '{}'", o.suite));
  if (o.draws < 1) usage_error("--draws must be >= 1");
  if (all || o.suite == "closed-vs-boundary")
    reports.push_back(verify_closed_vs_boundary(o.seed, o.draws));
  if (all || o.suite == "conservation") reports.push_back(verify_conservation(o.seed, o.draws));
  if (all || o.suite == "wavepacket") reports.push_back(verify_wavepacket(!o.quick));
  bool ok = true;
  for (const auto& r : reports) {
    r.print(out);
    ok = ok && r.passed();
  }
  return ok ? kExitOk : kExitPhysicsError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-photon scattering in coupled-resonator waveguides joined by mechanical modes",
               "crw"};
  app.require_subcommand(1);

  SmatrixOpts so;
  auto* sm = app.add_subcommand("smatrix", "S-matrix and flows at one incident wavenumber");
  sm->add_option("config", so.config, "Scenario file")->required();
  sm->add_option("--incident", so.incident, "Incident channel (a|b|c)");
  sm->add_option("--k", so.k, "Incident wavenumber, e.g. 0.785 or pi/4");
  sm->add_option("--angle-unit", so.angle_unit, "Unit of plain numbers in --k (rad|pi)")
      ->check(CLI::IsMember({"rad", "pi"}));
  sm->add_option("--backend", so.backend, "closed (default) or boundary")
      ->check(CLI::IsMember({"closed", "boundary"}));
  sm->add_option("--format", so.format, "text|json")->check(CLI::IsMember({"text", "json"}));

  SweepOpts sw;
  auto* sp = app.add_subcommand("sweep", "Grid sweep over one variable");
  sp->add_option("config", sw.config, "Scenario file")->required();
  sp->add_option("--var", sw.var, "k, delta1, delta2, delta3, phi or J_<channel><mode>");
  sp->add_option("--from", sw.from, "Range start");
  sp->add_option("--to", sw.to, "Range end");
  sp->add_option("--steps", sw.steps, "Grid points");
  sp->add_option("--out", sw.out, "Output file (stdout if omitted)");
  sp->add_option("--format", sw.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  sp->add_option("--incident", sw.incident, "a|b|c|all");
  sp->add_option("--k", sw.k, "Fixed wavenumber for non-k sweeps");
  sp->add_option("--k-channel", sw.k_channel, "Arm whose wavenumber sets the energy");
  sp->add_option("--angle-unit", sw.angle_unit, "rad|pi")->check(CLI::IsMember({"rad", "pi"}));
  sp->add_flag("--log10", sw.log10, "Append log10 flow columns (clamped at -16)");

  DesignOpts dopt;
  auto* ds = app.add_subcommand("design", "Perfect-circulator design solvers");
  ds->add_option("--topology", dopt.topology, "circ1|circ2-equal|circ2-k")->required();
  ds->add_option("--j2", dopt.j2, "J_{a,2} = J_{b,2} (circ1)");
  ds->add_option("--phi", dopt.phi, "Phase, e.g. pi/2");
  ds->add_option("--k", dopt.k, "Operating wavenumber");
  ds->add_option("--xi", dopt.xi, "Hopping of arms a and b");
  ds->add_option("--emit-config", dopt.emit_config, "Write the design as a scenario file");

  FigureOpts fo;
  auto* fg = app.add_subcommand("figure", "Regenerate a figure dataset");
  fg->add_option("--id", fo.id, "fig2a..fig10f or all")->required();
  fg->add_option("--out", fo.out, "Output directory")->required();
  fg->add_option("--steps", fo.steps, "Grid points per dataset");
  fg->add_option("--format", fo.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  fg->add_flag("--log10", fo.log10, "Append log10 flow columns");

  VerifyOpts vo;
  auto* vf = app.add_subcommand("verify", "Run oracle and invariant self-checks");
  vf->add_option("--suite", vo.suite, "closed-vs-boundary|wavepacket|conservation|all");
  vf->add_option("--seed", vo.seed, "Random seed");
  vf->add_option("--draws", vo.draws, "Random draws per topology");
  vf->add_flag("--quick", vo.quick, "Skip the sigma=40 wavepacket trend run");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (sm->parsed()) return cmd_smatrix(so, out);
    if (sp->parsed()) return cmd_sweep(sw, out);
    if (ds->parsed()) return cmd_design(dopt, out);
    if (fg->parsed()) return cmd_figure(fo, out);
    if (vf->parsed()) return cmd_verify(vo, out);
  } catch (const Error& e) {
    err << fmt::format("error [{}]: {}\n", reason_code(e.code()), e.what());
    return is_physics_error(e.code()) ? kExitPhysicsError : kExitInputError;
  } catch (const std::exception& e) {
    err << fmt::format("error: {}\n", e.what());
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace crw
