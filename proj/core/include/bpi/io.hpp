#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bpi/floorplan.hpp"
#include "bpi/identify.hpp"

namespace bpi {

// Floorplan files are YAML with keys name, architecture, power_budget_w,
// topology (grid: {rows, cols} or adjacency: [[id, id], ...]), units and an
// optional thermal block. Syntax errors report the line; invariant violations
// name the field.
Floorplan parse_floorplan(const std::filesystem::path& path);
Floorplan parse_floorplan_text(std::string_view text, std::string_view source = "<text>");

// Trace CSV: header `step,<unit0>,<unit1>,...`, one row per step, fixed-point
// values with 6 fractional digits (more via `digits`).
inline constexpr int kTraceDigits = 6;

void write_trace_csv(std::ostream& out, const Matrix& values,
                     const std::vector<std::string>& unit_ids,
                     Index first_step = 0, int digits = kTraceDigits);
void write_trace_csv(const std::filesystem::path& path, const Matrix& values,
                     const std::vector<std::string>& unit_ids,
                     Index first_step = 0, int digits = kTraceDigits);

struct CsvTrace {
  std::vector<std::string> columns;  // header names after `step`
  std::vector<long long> steps;
  Matrix values;                     // columns.size() x steps.size()
};

CsvTrace read_trace_csv(std::istream& in, std::string_view source = "<stream>");
CsvTrace read_trace_csv(const std::filesystem::path& path);

// Identified model as JSON: unit ids, strategy, a, b, r (row-major arrays)
// and a few diagnostics.
void save_model(const std::filesystem::path& path, const IdentifiedModel& model);
IdentifiedModel load_model(const std::filesystem::path& path);

}  // namespace bpi
