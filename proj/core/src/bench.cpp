#include "bpi/bench.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "bpi/io.hpp"

namespace bpi {

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v + 0.0);
  return buf;
}

std::string line_of(const std::filesystem::path& path, const YAML::Node& node) {
  const auto mark = node.Mark();
  return path.string() + (mark.is_null() ? "" : ":" + std::to_string(mark.line + 1));
}

template <class T>
T read_value(const YAML::Node& node, const std::filesystem::path& path, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(line_of(path, node) + ": " + key + ": invalid value");
  }
}

}  // namespace

CellError::CellError(const std::string& floorplan, InitStrategy strategy, const std::string& what)
    : NumericalError("cell (" + floorplan + ", " + std::string(to_string(strategy)) + "): " + what) {}

void BenchConfig::validate() const {
  if (floorplans.empty()) throw ConfigError("floorplans: need at least one floorplan");
  if (strategies.empty()) throw ConfigError("strategies: need at least one strategy");
  if (scenario.noise_sigma < 0.0) throw ConfigError("noise_sigma_k: must be >= 0");
  if (scenario.outlier_count < 0) throw ConfigError("outlier_count: must be >= 0");
  if (scenario.repeats_per_unit < 0) throw ConfigError("observations_per_unit: must be >= 0");
  if (scenario.transient_steps < 2) throw ConfigError("transient_steps: must be >= 2");
  if (scenario.training_segment < 1) throw ConfigError("training_segment_steps: must be >= 1");
  if (scenario.training_cycles < 1) throw ConfigError("training_cycles: must be >= 1");
  if (!(scenario.stress_fraction > 0.0 && scenario.stress_fraction <= 1.0)) {
    throw ConfigError("stress_fraction: must be in (0, 1]");
  }
  if (timing_repeats < 1) throw ConfigError("timing_repeats: must be >= 1");
  try {
    nmf.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

BenchConfig BenchConfig::load(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError(path.string() + ": cannot open config file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path.string() + ":" + std::to_string(e.mark.line + 1) +
                      ": syntax error: " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(path.string() + ": expected a mapping at top level");

  BenchConfig cfg;
  const auto base = path.parent_path();
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "floorplans") {
      if (!v.IsSequence()) throw ConfigError(line_of(path, v) + ": floorplans: expected a list");
      for (const auto& f : v) {
        std::filesystem::path p = read_value<std::string>(f, path, key);
        cfg.floorplans.push_back(p.is_absolute() ? p : base / p);
      }
    } else if (key == "strategies") {
      if (!v.IsSequence()) throw ConfigError(line_of(path, v) + ": strategies: expected a list");
      for (const auto& s : v) {
        try {
          cfg.strategies.push_back(parse_strategy(read_value<std::string>(s, path, key)));
        } catch (const ConfigError&) {
          throw;
        } catch (const InvalidInput& e) {
          throw ConfigError(line_of(path, s) + ": strategies: " + e.what());
        }
      }
    } else if (key == "noise_sigma_k") {
      cfg.scenario.noise_sigma = read_value<double>(v, path, key);
    } else if (key == "outlier_count") {
      cfg.scenario.outlier_count = read_value<Index>(v, path, key);
    } else if (key == "observations_per_unit") {
      cfg.scenario.repeats_per_unit = read_value<Index>(v, path, key);
    } else if (key == "transient_steps") {
      cfg.scenario.transient_steps = read_value<Index>(v, path, key);
    } else if (key == "training_segment_steps") {
      cfg.scenario.training_segment = read_value<Index>(v, path, key);
    } else if (key == "training_cycles") {
      cfg.scenario.training_cycles = read_value<Index>(v, path, key);
    } else if (key == "stress_fraction") {
      cfg.scenario.stress_fraction = read_value<double>(v, path, key);
    } else if (key == "seed") {
      cfg.scenario.seed = read_value<std::uint64_t>(v, path, key);
    } else if (key == "output_dir") {
      cfg.output_dir = read_value<std::string>(v, path, key);
    } else if (key == "rescale") {
      cfg.rescale = read_value<bool>(v, path, key);
    } else if (key == "timing_repeats") {
      cfg.timing_repeats = read_value<int>(v, path, key);
    } else if (key == "emit_traces") {
      cfg.emit_traces = read_value<bool>(v, path, key);
    } else if (key == "nmf") {
      if (!v.IsMap()) throw ConfigError(line_of(path, v) + ": nmf: expected a mapping");
      for (const auto& nkv : v) {
        const auto nkey = nkv.first.as<std::string>();
        const YAML::Node& nv = nkv.second;
        if (nkey == "max_iters") cfg.nmf.max_iters = read_value<int>(nv, path, "nmf.max_iters");
        else if (nkey == "rel_tol") cfg.nmf.rel_tol = read_value<double>(nv, path, "nmf.rel_tol");
        else if (nkey == "epsilon_guard") cfg.nmf.epsilon_guard = read_value<double>(nv, path, "nmf.epsilon_guard");
        else if (nkey == "seed") cfg.nmf.seed = read_value<std::uint64_t>(nv, path, "nmf.seed");
        else if (nkey == "settle_p") cfg.settle_p = read_value<bool>(nv, path, "nmf.settle_p");
        else throw ConfigError(line_of(path, nkv.first) + ": unknown key 'nmf." + nkey + "'");
      }
    } else {
      throw ConfigError(line_of(path, kv.first) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

const BenchCell& BenchReport::cell(const std::string& floorplan, InitStrategy strategy) const {
  for (const auto& c : cells) {
    if (c.floorplan == floorplan && c.strategy == strategy) return c;
  }
  throw InvalidInput("no report cell for (" + floorplan + ", " + std::string(to_string(strategy)) + ")");
}

void BenchReport::write_csv(std::ostream& out) const {
  out << "floorplan,strategy,units,observations,kept_observations,error_pct,r_error_pct,"
         "steady_residual,nmf_iters,clamped_fraction\n";
  for (const auto& c : cells) {
    out << c.floorplan << ',' << to_string(c.strategy) << ',' << c.units << ','
        << c.observations << ',' << c.kept_observations << ',' << fixed(c.error_pct) << ','
        << fixed(c.r_error_pct) << ',' << fixed(c.steady_residual, 9) << ',' << c.nmf_iters
        << ',' << fixed(c.clamped_fraction) << '\n';
  }
}

void BenchReport::write_runtime_csv(std::ostream& out) const {
  out << "floorplan,strategy,runtime_s\n";
  for (const auto& c : cells) {
    out << c.floorplan << ',' << to_string(c.strategy) << ',' << fixed(c.runtime_s, 9) << '\n';
  }
}

void BenchReport::write_summary(std::ostream& out) const {
  out << std::left << std::setw(10) << "floorplan" << std::setw(10) << "strategy" << std::right
      << std::setw(12) << "error %" << std::setw(12) << "R error %" << std::setw(10) << "kept"
      << std::setw(8) << "iters" << std::setw(14) << "runtime ms" << '\n';
  for (const auto& c : cells) {
    out << std::left << std::setw(10) << c.floorplan << std::setw(10) << to_string(c.strategy)
        << std::right << std::setw(12) << fixed(c.error_pct, 3) << std::setw(12)
        << fixed(c.r_error_pct, 3) << std::setw(10)
        << (std::to_string(c.kept_observations) + "/" + std::to_string(c.observations))
        << std::setw(8) << c.nmf_iters << std::setw(14) << fixed(c.runtime_s * 1e3, 3) << '\n';
  }
}

std::vector<std::filesystem::path> emit_comparison_traces(const OnlineEstimate& estimate,
                                                          const PowerTrace& p_true,
                                                          const ThermalTrace& t_r,
                                                          const std::filesystem::path& out_dir) {
  const Index n = t_r.units();
  require(p_true.units() == n && estimate.p_est.units() == n,
          "emit_comparison_traces: unit counts differ");
  require(p_true.steps() == t_r.steps() &&
              estimate.p_est.steps() + estimate.first_step == t_r.steps(),
          "emit_comparison_traces: step counts differ");
  std::vector<std::string> ids = t_r.unit_ids;
  if (ids.empty()) {
    for (Index i = 0; i < n; ++i) ids.push_back("unit" + std::to_string(i));
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw InvalidInput(out_dir.string() + ": cannot create directory: " + ec.message());

  std::vector<std::filesystem::path> files{out_dir / "temps.csv", out_dir / "power_true.csv",
                                           out_dir / "power_est.csv"};
  write_trace_csv(files[0], t_r.temps, ids);
  write_trace_csv(files[1], p_true.powers, ids);
  write_trace_csv(files[2], estimate.p_est.powers, ids, estimate.first_step);
  return files;
}

BenchReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;

  std::vector<Floorplan> floorplans;
  for (const auto& path : cfg.floorplans) floorplans.push_back(parse_floorplan(path));

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError(cfg.output_dir.string() + ": cannot create output directory");

  for (std::size_t f = 0; f < floorplans.size(); ++f) {
    const Floorplan& fp = floorplans[f];
    ScenarioOptions opts = cfg.scenario;
    opts.seed = cfg.scenario.seed + 1000003ULL * f;
    std::optional<Scenario> built;
    try {
      built = make_scenario(fp, opts);
    } catch (const std::exception& e) {
      throw ConfigError(fp.name() + ": cannot build scenario: " + e.what());
    }
    const Scenario& sc = *built;

    for (InitStrategy strategy : cfg.strategies) {
      IdentifyOptions io;
      io.strategy = strategy;
      io.nmf = cfg.nmf;
      io.settle_p = cfg.settle_p;
      StrategyOutcome outcome;
      try {
        outcome = run_strategy(sc, io, cfg.rescale, cfg.timing_repeats);
      } catch (const std::exception& e) {
        throw CellError(fp.name(), strategy, e.what());
      }

      BenchCell cell;
      cell.floorplan = fp.name();
      cell.strategy = strategy;
      cell.units = static_cast<Index>(fp.size());
      cell.observations = outcome.model.diagnostics.observations;
      cell.kept_observations = outcome.model.diagnostics.kept_observations;
      cell.error_pct = outcome.error_pct;
      cell.r_error_pct = outcome.r_error_pct;
      cell.steady_residual = outcome.model.diagnostics.steady_residual;
      cell.runtime_s = outcome.runtime_s;
      cell.nmf_iters = outcome.model.diagnostics.nmf_iters;
      cell.clamped_fraction = outcome.estimate.clamped_fraction;
      if (cfg.emit_traces) {
        cell.trace_files = emit_comparison_traces(
            outcome.estimate, sc.workload.power, sc.workload.temps,
            cfg.output_dir / fp.name() / std::string(to_string(strategy)));
      }
      report.cells.push_back(std::move(cell));
    }
  }

  auto write = [&](const char* name, auto&& fn) {
    std::ofstream out(cfg.output_dir / name, std::ios::binary);
    if (!out) throw ConfigError((cfg.output_dir / name).string() + ": cannot open for writing");
    fn(out);
  };
  write("report.csv", [&](std::ostream& o) { report.write_csv(o); });
  write("runtime.csv", [&](std::ostream& o) { report.write_runtime_csv(o); });
  write("summary.txt", [&](std::ostream& o) { report.write_summary(o); });
  return report;
}

}  // namespace bpi
