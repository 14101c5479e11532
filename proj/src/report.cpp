#include "crw/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>

namespace crw {

namespace {

using json = nlohmann::ordered_json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json statuses_json(const std::vector<ChannelStatus>& statuses,
                   const std::vector<ChannelSpec>& channels) {
  json out = json::object();
  for (std::size_t l = 0; l < statuses.size(); ++l) {
    const auto& st = statuses[l];
    json s;
    switch (st.kind()) {
      case ChannelStatus::Kind::kPropagating:
        s = {{"kind", "propagating"}, {"k", st.wavenumber()}};
        break;
      case ChannelStatus::Kind::kEvanescent:
        s = {{"kind", "evanescent"}, {"z", st.phase_factor().real()}, {"decay", st.decay()}};
        break;
      case ChannelStatus::Kind::kBandEdge: s = {{"kind", "band-edge"}}; break;
    }
    s["xi"] = channels[l].xi;
    out[std::string(to_string(channels[l].label))] = s;
  }
  return out;
}

json matrix_json(const Eigen::MatrixXd& flows, const Eigen::MatrixXcd& amps) {
  json f = json::object();
  json a = json::object();
  const auto n = flows.rows();
  for (Eigen::Index o = 0; o < n; ++o) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto key = fmt::format("{}{}", to_string(channel_at(static_cast<std::size_t>(o))),
                                   to_string(channel_at(static_cast<std::size_t>(i))));
      f["I_" + key] = number_or_null(flows(o, i));
      a["s_" + key] = {number_or_null(amps(o, i).real()), number_or_null(amps(o, i).imag())};
    }
  }
  return {{"flows", f}, {"amplitudes", a}};
}

}  // namespace

std::vector<std::string> flow_columns(std::size_t channels) {
  std::vector<std::string> cols;
  for (std::size_t o = 0; o < channels; ++o)
    for (std::size_t i = 0; i < channels; ++i)
      cols.push_back(fmt::format("I_{}{}", to_string(channel_at(o)), to_string(channel_at(i))));
  return cols;
}

double clamped_log10(double flow) {
  if (std::isnan(flow)) return flow;
  return flow <= 1e-16 ? -16.0 : std::max(-16.0, std::log10(flow));
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_sweep_csv(std::ostream& out, const SweepSpec& spec,
                     const std::vector<SweepRecord>& records, bool log10_columns) {
  const auto n = spec.scenario.channels.size();
  const auto cols = flow_columns(n);
  out << "var,value,status,E";
  for (const auto& c : cols) out << ',' << c;
  out << ",conservation_residual";
  if (log10_columns)
    for (const auto& c : cols) out << ",log10_" << c;
  out << '\n';
  const auto var = to_string(spec.variable);
  for (const auto& r : records) {
    out << var << ',' << format_value(r.value) << ',' << r.status << ','
        << format_value(r.energy);
    for (std::size_t o = 0; o < n; ++o)
      for (std::size_t i = 0; i < n; ++i)
        out << ',' << format_value(r.flows(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)));
    out << ',' << format_value(r.conservation_residual);
    if (log10_columns)
      for (std::size_t o = 0; o < n; ++o)
        for (std::size_t i = 0; i < n; ++i)
          out << ',' << format_value(clamped_log10(
                            r.flows(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i))));
    out << '\n';
  }
}

void write_sweep_json(std::ostream& out, const SweepSpec& spec,
                      const std::vector<SweepRecord>& records, bool log10_columns) {
  json doc;
  doc["name"] = spec.name;
  doc["topology"] = std::string(to_string(spec.scenario.node.topology));
  doc["var"] = to_string(spec.variable);
  doc["from"] = spec.lo;
  doc["to"] = spec.hi;
  doc["steps"] = spec.steps;
  doc["incident"] = spec.scenario.incident
                        ? std::string(to_string(*spec.scenario.incident))
                        : std::string("all");
  doc["k_channel"] = std::string(to_string(spec.scenario.reference_channel()));
  json rules = json::array();
  for (const auto& r : spec.rules) rules.push_back(std::string(to_string(r.kind)));
  doc["rules"] = rules;
  json rows = json::array();
  for (const auto& r : records) {
    json row;
    row["index"] = r.index;
    row["value"] = r.value;
    row["status"] = r.status;
    row["E"] = r.energy;
    if (r.computed) {
      auto m = matrix_json(r.flows, r.amplitudes);
      row["flows"] = m["flows"];
      row["amplitudes"] = m["amplitudes"];
      row["statuses"] = statuses_json(r.statuses, spec.scenario.channels);
      if (log10_columns) {
        json lg = json::object();
        for (auto& [k, v] : m["flows"].items())
          lg["log10_" + k] = v.is_null() ? json(nullptr) : json(clamped_log10(v.get<double>()));
        row["log10_flows"] = lg;
      }
    }
    row["conservation_residual"] = number_or_null(r.conservation_residual);
    rows.push_back(row);
  }
  doc["records"] = rows;
  out << doc.dump(1) << '\n';
}

void write_smatrix_text(std::ostream& out, const ScatteringResult& r, const NodeSpec& node) {
  out << fmt::format("topology: {}\n", to_string(node.topology));
  out << fmt::format("E={}\n", format_value(r.energy));
  for (std::size_t l = 0; l < r.size(); ++l)
    out << fmt::format("status_{}: {}\n", to_string(r.channels[l].label),
                       r.statuses[l].describe());
  const auto n = static_cast<Eigen::Index>(r.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!r.statuses[static_cast<std::size_t>(i)].is_open()) continue;
    std::string amps;
    std::string flows;
    for (Eigen::Index o = 0; o < n; ++o) {
      const auto key = fmt::format("{}{}", to_string(channel_at(static_cast<std::size_t>(o))),
                                   to_string(channel_at(static_cast<std::size_t>(i))));
      const cplx s = r.amplitudes(o, i);
      amps += fmt::format("{}s_{}={}{:+.12g}i", amps.empty() ? "" : " ", key,
                          format_value(s.real()), s.imag());
      flows += fmt::format("{}I_{}={:.6f}", flows.empty() ? "" : " ", key, r.flows(o, i));
    }
    out << "amplitudes: " << amps << '\n';
    out << "flows: " << flows << '\n';
  }
  out << fmt::format("conservation_residual={}\n", format_value(r.conservation_residual()));
}

void write_smatrix_json(std::ostream& out, const ScatteringResult& r, const NodeSpec& node) {
  json doc;
  doc["topology"] = std::string(to_string(node.topology));
  doc["E"] = r.energy;
  doc["statuses"] = statuses_json(r.statuses, r.channels);
  auto m = matrix_json(r.flows, r.amplitudes);
  doc["flows"] = m["flows"];
  doc["amplitudes"] = m["amplitudes"];
  doc["conservation_residual"] = r.conservation_residual();
  out << doc.dump(1) << '\n';
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::random_device rd;
  const auto tmp = dir / fmt::format(".{}.tmp{:08x}", path.filename().string(), rd());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::kConfig, fmt::format("cannot write {}", tmp.string()));
    f << content;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      fail(ErrorCode::kConfig, fmt::format("write to {} failed", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorCode::kConfig, fmt::format("cannot rename onto {}: {}", path.string(), ec.message()));
  }
}

}  // namespace crw
