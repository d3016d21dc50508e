#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bpi/identify.hpp"
#include "bpi/nmf.hpp"
#include "bpi/scenario.hpp"

namespace bpi {

struct BenchConfig {
  std::vector<std::filesystem::path> floorplans;
  std::vector<InitStrategy> strategies;
  ScenarioOptions scenario;
  NmfConfig nmf;
  bool settle_p = true;
  bool rescale = true;
  int timing_repeats = 3;
  bool emit_traces = true;
  std::filesystem::path output_dir = "bench_out";

  // Throws ConfigError.
  void validate() const;

  // YAML; unknown keys are rejected and relative floorplan paths resolve
  // against the config file's directory.
  static BenchConfig load(const std::filesystem::path& path);
};

struct BenchCell {
  std::string floorplan;
  InitStrategy strategy = InitStrategy::dbscan;
  Index units = 0;
  Index observations = 0;
  Index kept_observations = 0;
  double error_pct = 0.0;
  double r_error_pct = 0.0;
  double steady_residual = 0.0;
  double runtime_s = 0.0;
  int nmf_iters = 0;
  double clamped_fraction = 0.0;
  std::vector<std::filesystem::path> trace_files;
};

struct BenchReport {
  std::vector<BenchCell> cells;

  const BenchCell& cell(const std::string& floorplan, InitStrategy strategy) const;

  // Deterministic columns only (no wall clock).
  void write_csv(std::ostream& out) const;
  void write_runtime_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

// Raised for a failure inside one (floorplan, strategy) cell.
class CellError : public NumericalError {
 public:
  CellError(const std::string& floorplan, InitStrategy strategy, const std::string& what);
};

/// Runs every (floorplan, strategy) cell and writes report.csv,
/// runtime.csv, summary.txt and, when enabled, per-cell trace CSVs under
/// cfg.output_dir.
BenchReport run_benchmark(const BenchConfig& cfg);

// Writes temps.csv, power_true.csv and power_est.csv into out_dir.
std::vector<std::filesystem::path> emit_comparison_traces(
    const OnlineEstimate& estimate, const PowerTrace& p_true, const ThermalTrace& t_r,
    const std::filesystem::path& out_dir);

}  // namespace bpi
