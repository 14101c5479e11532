#pragma once

// Serialization of single-point results and sweep records.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "crw/core.hpp"
#include "crw/sweep.hpp"

namespace crw {

// Flow column names in (out, in) row-major order: I_aa, I_ab, I_ac, I_ba, ...
// where I_ab is the flow into a for incidence from b.
std::vector<std::string> flow_columns(std::size_t channels);

// log10 of a flow, clamped below at -16; NaN stays NaN.
double clamped_log10(double flow);

// %.12g, with "nan" for NaN.
std::string format_value(double v);

void write_sweep_csv(std::ostream& out, const SweepSpec& spec,
                     const std::vector<SweepRecord>& records, bool log10_columns = false);
void write_sweep_json(std::ostream& out, const SweepSpec& spec,
                      const std::vector<SweepRecord>& records, bool log10_columns = false);

void write_smatrix_text(std::ostream& out, const ScatteringResult& r, const NodeSpec& node);
void write_smatrix_json(std::ostream& out, const ScatteringResult& r, const NodeSpec& node);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace crw
