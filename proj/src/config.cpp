#include "crw/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace crw {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(const YAML::Node& at, std::string_view field,
                          const std::string& msg) const {
    const auto mark = at.Mark();
    if (mark.line >= 0)
      fail(ErrorCode::kConfig,
           fmt::format("{}:{}:{}: {}: {}", source_, mark.line + 1, mark.column + 1, field, msg));
    fail(ErrorCode::kConfig, fmt::format("{}: {}: {}", source_, field, msg));
  }

  void only_keys(const YAML::Node& map, std::string_view where,
                 std::initializer_list<std::string_view> allowed) const {
    if (!map.IsMap()) error(map, where, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        error(kv.first, fmt::format("{}.{}", where, key), "unknown key");
    }
  }

  std::string scalar(const YAML::Node& n, std::string_view field) const {
    if (!n.IsScalar()) error(n, field, "expected a scalar");
    return n.as<std::string>();
  }

  double number(const YAML::Node& n, std::string_view field) const {
    const auto s = scalar(n, field);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      error(n, field, fmt::format("expected a finite number, got '{}'", s));
    }
  }

  int integer(const YAML::Node& n, std::string_view field) const {
    const double v = number(n, field);
    if (v != std::floor(v) || std::abs(v) > 1e9) error(n, field, "expected an integer");
    return static_cast<int>(v);
  }

  double angle(const YAML::Node& n, std::string_view field, AngleUnit unit) const {
    const auto s = scalar(n, field);
    try {
      return parse_angle(s, unit);
    } catch (const Error& e) {
      error(n, field, e.what());
    }
  }

  Channel channel(const YAML::Node& n, std::string_view field) const {
    const auto s = scalar(n, field);
    const auto ch = parse_channel(s);
    if (!ch) error(n, field, fmt::format("unknown channel '{}' (expected a, b or c)", s));
    return *ch;
  }

  Mode mode(const YAML::Node& n, std::string_view field) const {
    const auto s = scalar(n, field);
    const auto m = parse_mode(s);
    if (!m) error(n, field, fmt::format("unknown mode '{}' (expected d1, d2 or d3)", s));
    return *m;
  }

  YAML::Node required(const YAML::Node& map, std::string_view where, const char* key) const {
    const auto n = map[key];
    if (!n) error(map, fmt::format("{}{}", where.empty() ? "" : std::string(where) + ".", key),
                  "missing required key");
    return n;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::kConfig, fmt::format("{}:{}:{}: syntax error: {}", source, e.mark.line + 1,
                                         e.mark.column + 1, e.msg));
  }
  if (!root || !root.IsMap()) fail(ErrorCode::kConfig, fmt::format("{}: expected a mapping", source));
  rd.only_keys(root, "config",
               {"topology", "angle_unit", "mode_energy", "phi", "channels", "modes", "couplings",
                "incident", "k", "k_channel", "rules", "sweep"});

  ScenarioConfig cfg;
  if (const auto u = root["angle_unit"]) {
    const auto s = rd.scalar(u, "angle_unit");
    if (s != "rad" && s != "pi") rd.error(u, "angle_unit", "must be 'rad' or 'pi'");
    cfg.angle_unit = parse_angle_unit(s);
  }

  const auto topo_node = rd.required(root, "", "topology");
  const auto topo = parse_topology(rd.scalar(topo_node, "topology"));
  if (!topo)
    rd.error(topo_node, "topology",
             "expected two-port, circulator-two-modes or circulator-three-modes");
  cfg.node.topology = *topo;

  if (const auto s = root["mode_energy"]) {
    const auto sign = parse_mode_energy_sign(rd.scalar(s, "mode_energy"));
    if (!sign) rd.error(s, "mode_energy", "expected minus-delta or plus-delta");
    cfg.node.mode_energy_sign = *sign;
  }
  if (const auto p = root["phi"]) {
    double phi = rd.angle(p, "phi", cfg.angle_unit);
    phi = std::fmod(phi, 2.0 * kPi);
    if (phi < 0.0) phi += 2.0 * kPi;
    if (phi >= 2.0 * kPi) phi = 0.0;
    cfg.node.phi = phi;
  }

  const auto channels = rd.required(root, "", "channels");
  if (!channels.IsSequence()) rd.error(channels, "channels", "expected a list");
  std::set<Channel> seen_ch;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto c = channels[i];
    const auto where = fmt::format("channels[{}]", i);
    rd.only_keys(c, where, {"label", "xi"});
    ChannelSpec spec;
    spec.label = rd.channel(rd.required(c, where, "label"), where + ".label");
    spec.xi = rd.number(rd.required(c, where, "xi"), where + ".xi");
    if (!(spec.xi > 0.0)) rd.error(c["xi"], where + ".xi", "hopping must be > 0");
    if (!seen_ch.insert(spec.label).second) rd.error(c, where, "duplicate channel label");
    cfg.channels.push_back(spec);
  }
  std::sort(cfg.channels.begin(), cfg.channels.end(),
            [](const auto& x, const auto& y) { return index(x.label) < index(y.label); });

  const auto modes = rd.required(root, "", "modes");
  if (!modes.IsSequence()) rd.error(modes, "modes", "expected a list");
  std::set<Mode> seen_mode;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto m = modes[i];
    const auto where = fmt::format("modes[{}]", i);
    rd.only_keys(m, where, {"label", "delta", "gamma"});
    MechanicalModeSpec spec;
    spec.label = rd.mode(rd.required(m, where, "label"), where + ".label");
    if (m["delta"]) spec.delta = rd.number(m["delta"], where + ".delta");
    if (m["gamma"]) spec.gamma = rd.number(m["gamma"], where + ".gamma");
    if (spec.gamma < 0.0) rd.error(m["gamma"], where + ".gamma", "damping must be >= 0");
    if (!seen_mode.insert(spec.label).second) rd.error(m, where, "duplicate mode label");
    cfg.node.modes.push_back(spec);
  }
  std::sort(cfg.node.modes.begin(), cfg.node.modes.end(),
            [](const auto& x, const auto& y) { return index(x.label) < index(y.label); });

  const auto couplings = rd.required(root, "", "couplings");
  if (!couplings.IsSequence()) rd.error(couplings, "couplings", "expected a list");
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    const auto c = couplings[i];
    const auto where = fmt::format("couplings[{}]", i);
    rd.only_keys(c, where, {"channel", "mode", "J"});
    CouplingEdge e;
    e.channel = rd.channel(rd.required(c, where, "channel"), where + ".channel");
    e.mode = rd.mode(rd.required(c, where, "mode"), where + ".mode");
    e.strength = rd.number(rd.required(c, where, "J"), where + ".J");
    if (e.strength < 0.0) rd.error(c["J"], where + ".J", "coupling must be >= 0");
    e.carries_phase = e.channel == Channel::b && e.mode == Mode::d1;
    cfg.node.edges.push_back(e);
  }

  if (const auto n = root["incident"]) {
    const auto s = rd.scalar(n, "incident");
    if (s != "all") cfg.incident = rd.channel(n, "incident");
  }
  if (const auto n = root["k_channel"]) cfg.k_channel = rd.channel(n, "k_channel");
  if (const auto n = root["k"]) cfg.k = rd.angle(n, "k", cfg.angle_unit);

  if (const auto rules = root["rules"]) {
    if (!rules.IsSequence()) rd.error(rules, "rules", "expected a list");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const auto r = rules[i];
      const auto where = fmt::format("rules[{}]", i);
      DerivedRule rule;
      if (r.IsMap()) {
        rd.only_keys(r, where, {"rule", "design_k"});
        if (r["design_k"])
          rule.design_k = rd.angle(r["design_k"], where + ".design_k", cfg.angle_unit);
      }
      // Node assignment in yaml-cpp rebinds the referee, so no shared handle here.
      const YAML::Node name = r.IsMap() ? rd.required(r, where, "rule") : r;
      const auto kind = parse_derived_rule(rd.scalar(name, where));
      if (!kind)
        rd.error(name, where,
                 "expected optimal-damping, two-mode-design or delta3-follows-delta2");
      rule.kind = *kind;
      cfg.rules.push_back(rule);
    }
  }

  if (const auto sw = root["sweep"]) {
    rd.only_keys(sw, "sweep", {"var", "from", "to", "steps"});
    if (sw["var"]) {
      const auto t = parse_sweep_target(rd.scalar(sw["var"], "sweep.var"));
      if (!t) rd.error(sw["var"], "sweep.var", "expected k, delta1..3, phi or J_<ch><mode>");
      cfg.sweep.var = t;
    }
    const bool angular = cfg.sweep.var && (cfg.sweep.var->kind == SweepVariable::kK ||
                                           cfg.sweep.var->kind == SweepVariable::kPhi);
    for (const char* key : {"from", "to"}) {
      if (!sw[key]) continue;
      const auto field = fmt::format("sweep.{}", key);
      const double v = angular ? rd.angle(sw[key], field, cfg.angle_unit)
                               : rd.number(sw[key], field);
      (std::string_view(key) == "from" ? cfg.sweep.from : cfg.sweep.to) = v;
    }
    if (sw["steps"]) cfg.sweep.steps = rd.integer(sw["steps"], "sweep.steps");
  }

  try {
    validate(cfg.node, cfg.channels);
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, fmt::format("{}: {}", source, e.what()));
  }
  if (cfg.incident && index(*cfg.incident) >= cfg.channels.size())
    rd.error(root["incident"], "incident", "channel not present in this topology");
  if (cfg.k_channel && index(*cfg.k_channel) >= cfg.channels.size())
    rd.error(root["k_channel"], "k_channel", "channel not present in this topology");
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, fmt::format("{}: cannot open config file", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string to_yaml(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "topology" << YAML::Value << std::string(to_string(cfg.node.topology));
  out << YAML::Key << "angle_unit" << YAML::Value << "rad";
  out << YAML::Key << "mode_energy" << YAML::Value
      << std::string(to_string(cfg.node.mode_energy_sign));
  out << YAML::Key << "phi" << YAML::Value << format_angle(cfg.node.phi);
  out << YAML::Key << "channels" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : cfg.channels)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "label" << YAML::Value
        << std::string(to_string(c.label)) << YAML::Key << "xi" << YAML::Value
        << fmt::format("{}", c.xi) << YAML::EndMap;
  out << YAML::EndSeq;
  out << YAML::Key << "modes" << YAML::Value << YAML::BeginSeq;
  for (const auto& m : cfg.node.modes)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "label" << YAML::Value
        << std::string(to_string(m.label)) << YAML::Key << "delta" << YAML::Value
        << fmt::format("{}", m.delta) << YAML::Key << "gamma" << YAML::Value
        << fmt::format("{}", m.gamma) << YAML::EndMap;
  out << YAML::EndSeq;
  out << YAML::Key << "couplings" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : cfg.node.edges)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "channel" << YAML::Value
        << std::string(to_string(e.channel)) << YAML::Key << "mode" << YAML::Value
        << std::string(to_string(e.mode)) << YAML::Key << "J" << YAML::Value
        << fmt::format("{}", e.strength) << YAML::EndMap;
  out << YAML::EndSeq;
  if (cfg.incident)
    out << YAML::Key << "incident" << YAML::Value << std::string(to_string(*cfg.incident));
  if (cfg.k_channel)
    out << YAML::Key << "k_channel" << YAML::Value << std::string(to_string(*cfg.k_channel));
  if (cfg.k) out << YAML::Key << "k" << YAML::Value << format_angle(*cfg.k);
  if (!cfg.rules.empty()) {
    out << YAML::Key << "rules" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : cfg.rules) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "rule" << YAML::Value
          << std::string(to_string(r.kind));
      if (r.kind == DerivedRuleKind::kCirculatorTwoModeDesign)
        out << YAML::Key << "design_k" << YAML::Value << format_angle(r.design_k);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  const auto& sw = cfg.sweep;
  if (sw.var || sw.from || sw.to || sw.steps) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    if (sw.var) out << YAML::Key << "var" << YAML::Value << to_string(*sw.var);
    if (sw.from) out << YAML::Key << "from" << YAML::Value << fmt::format("{}", *sw.from);
    if (sw.to) out << YAML::Key << "to" << YAML::Value << fmt::format("{}", *sw.to);
    if (sw.steps) out << YAML::Key << "steps" << YAML::Value << *sw.steps;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace crw
