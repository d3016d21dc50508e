// bpi: command-line front end for the identification toolkit.
//
//   bpi bench run --config <path> [--out <dir>] [--seed N]
//   bpi bench floorplans --list [--dir <dir>]
//   bpi identify --floorplan <path> --init <strategy> [options]
//   bpi estimate --model <path> --temps <csv> --total-power <csv> [--no-rescale]
//
// Exit status: 0 ok, 1 configuration or input error, 2 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bpi/bench.hpp"
#include "bpi/identify.hpp"
#include "bpi/io.hpp"
#include "bpi/scenario.hpp"

namespace fs = std::filesystem;
using bpi::Index;
using bpi::Matrix;
using bpi::Vector;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

#ifndef BPI_DATA_DIR
#define BPI_DATA_DIR "data"
#endif

struct BenchRunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct ListArgs {
  bool list = false;
  std::string dir = std::string(BPI_DATA_DIR) + "/floorplans";
};

struct IdentifyArgs {
  std::string floorplan;
  std::string init = "dbscan";
  std::optional<double> eps;
  std::optional<std::size_t> min_pts;
  int max_iters = 3;
  double rel_tol = 1e-6;
  std::uint64_t nmf_seed = 0;
  bool no_settle = false;
  // Measured data; a synthetic ground-truth experiment is used when absent.
  std::string steady_temps;
  std::string steady_total;
  std::vector<std::string> train_temps;
  std::vector<std::string> train_power;
  // Synthetic experiment knobs.
  std::uint64_t seed = 1;
  double noise = 0.1;
  Index outliers = 3;
  std::string out = "model.json";
  std::string emit_workload;
};

struct EstimateArgs {
  std::string model;
  std::string temps;
  std::string total_power;
  bool no_rescale = false;
  std::string out;
};

Vector read_total_csv(const fs::path& path, Index expected) {
  const bpi::CsvTrace t = bpi::read_trace_csv(path);
  if (t.values.rows() != 1) {
    throw bpi::ConfigError(path.string() + ": expected exactly one value column (total power)");
  }
  if (expected >= 0 && t.values.cols() != expected) {
    throw bpi::ConfigError(path.string() + ": " + std::to_string(t.values.cols()) +
                           " rows, expected " + std::to_string(expected));
  }
  return t.values.row(0).transpose();
}

// Reorders CSV columns to the floorplan's unit order.
Matrix columns_in_order(const bpi::CsvTrace& t, const std::vector<std::string>& ids,
                        const fs::path& path) {
  Matrix out(static_cast<Index>(ids.size()), t.values.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), ids[i]);
    if (it == t.columns.end()) {
      throw bpi::ConfigError(path.string() + ": missing column '" + ids[i] + "'");
    }
    out.row(static_cast<Index>(i)) = t.values.row(it - t.columns.begin());
  }
  return out;
}

int run_bench(const BenchRunArgs& args) {
  bpi::BenchConfig cfg = bpi::BenchConfig::load(args.config);
  if (!args.out.empty()) cfg.output_dir = args.out;
  if (args.seed) cfg.scenario.seed = *args.seed;
  const bpi::BenchReport report = bpi::run_benchmark(cfg);
  report.write_summary(std::cout);
  std::cout << "report: " << (cfg.output_dir / "report.csv").string() << '\n';
  return kExitOk;
}

int list_floorplans(const ListArgs& args) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(args.dir, ec)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".yaml" || ext == ".yml")) files.push_back(e.path());
  }
  if (ec) throw bpi::ConfigError(args.dir + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::printf("%-6s %-14s %5s %8s  %s\n", "name", "architecture", "units", "budget_w", "path");
  for (const auto& f : files) {
    const bpi::Floorplan fp = bpi::parse_floorplan(f);
    std::printf("%-6s %-14s %5ld %8.1f  %s\n", fp.name().c_str(),
                std::string(bpi::to_string(fp.architecture())).c_str(),
                static_cast<long>(fp.size()), fp.power_budget_w(), f.string().c_str());
  }
  return kExitOk;
}

void print_model_summary(const bpi::IdentifiedModel& m) {
  const auto& d = m.diagnostics;
  std::printf("strategy        %s\n", std::string(bpi::to_string(m.init_strategy)).c_str());
  std::printf("observations    %ld kept of %ld\n", static_cast<long>(d.kept_observations),
              static_cast<long>(d.observations));
  std::printf("nmf sweeps      %d (objective %.6g)\n", d.nmf_iters,
              d.objective_history.empty() ? 0.0 : d.objective_history.back());
  std::printf("steady residual %.6f\n", d.steady_residual);
  std::printf("a fit residual  %.6f\n", d.a_fit_residual);
  for (const auto& note : d.notes) std::printf("note: %s\n", note.c_str());
}

int run_identify(const IdentifyArgs& args) {
  const bpi::Floorplan fp = bpi::parse_floorplan(args.floorplan);
  bpi::IdentifyOptions opts;
  opts.strategy = bpi::parse_strategy(args.init);
  opts.nmf.max_iters = args.max_iters;
  opts.nmf.rel_tol = args.rel_tol;
  opts.nmf.seed = args.nmf_seed;
  opts.nmf.validate();
  opts.settle_p = !args.no_settle;
  opts.dbscan.eps = args.eps;
  opts.dbscan.min_pts = args.min_pts;

  const bool measured = !args.steady_temps.empty();
  if (measured) {
    if (args.steady_total.empty() || args.train_temps.empty() ||
        args.train_temps.size() != args.train_power.size()) {
      throw bpi::ConfigError(
          "measured mode needs --steady-total and matching --train-temps/--train-power pairs");
    }
    const auto ids = fp.unit_ids();
    bpi::SteadyStateDataset ds;
    ds.t_s = columns_in_order(bpi::read_trace_csv(fs::path(args.steady_temps)), ids,
                              args.steady_temps);
    ds.p_total = read_total_csv(args.steady_total, ds.t_s.cols());
    std::vector<bpi::TransientPair> training;
    for (std::size_t i = 0; i < args.train_temps.size(); ++i) {
      bpi::TransientPair tp;
      tp.temps.temps = columns_in_order(bpi::read_trace_csv(fs::path(args.train_temps[i])), ids,
                                        args.train_temps[i]);
      tp.temps.unit_ids = ids;
      tp.power.powers = columns_in_order(bpi::read_trace_csv(fs::path(args.train_power[i])), ids,
                                         args.train_power[i]);
      training.push_back(std::move(tp));
    }
    const bpi::IdentifiedModel model = bpi::offline_identify(ds, training, opts);
    bpi::save_model(args.out, model);
    print_model_summary(model);
    std::printf("model written to %s\n", args.out.c_str());
    return kExitOk;
  }

  bpi::ScenarioOptions so;
  so.seed = args.seed;
  so.noise_sigma = args.noise;
  so.outlier_count = args.outliers;
  const bpi::Scenario sc = bpi::make_scenario(fp, so);
  const bpi::StrategyOutcome outcome = bpi::run_strategy(sc, opts);
  bpi::save_model(args.out, outcome.model);
  print_model_summary(outcome.model);
  std::printf("r error         %.3f %% (vs ground truth)\n", outcome.r_error_pct);
  std::printf("workload error  %.3f %%\n", outcome.error_pct);
  std::printf("model written to %s\n", args.out.c_str());

  if (!args.emit_workload.empty()) {
    const fs::path dir = args.emit_workload;
    fs::create_directories(dir);
    const auto& w = sc.workload;
    bpi::write_trace_csv(dir / "temps.csv", w.temps.temps, w.temps.unit_ids);
    bpi::write_trace_csv(dir / "power_true.csv", w.power.powers, w.temps.unit_ids);
    bpi::write_trace_csv(dir / "total_power.csv", w.power.totals().transpose(), {"total"});
    std::printf("workload written to %s\n", dir.string().c_str());
  }
  return kExitOk;
}

int run_estimate(const EstimateArgs& args) {
  const bpi::IdentifiedModel model = bpi::load_model(args.model);
  const bpi::CsvTrace temps_csv = bpi::read_trace_csv(fs::path(args.temps));
  bpi::ThermalTrace t_r;
  t_r.unit_ids = model.unit_ids;
  t_r.temps = model.unit_ids.empty() ? temps_csv.values
                                     : columns_in_order(temps_csv, model.unit_ids, args.temps);
  if (t_r.unit_ids.empty()) t_r.unit_ids = temps_csv.columns;
  const Vector totals = read_total_csv(args.total_power, t_r.temps.cols());

  const bpi::OnlineEstimate est = bpi::online_estimate(model, t_r, totals, !args.no_rescale);
  const Matrix& p = est.p_est.powers;
  if (args.out.empty()) {
    bpi::write_trace_csv(std::cout, p, t_r.unit_ids, est.first_step);
  } else {
    bpi::write_trace_csv(fs::path(args.out), p, t_r.unit_ids, est.first_step);
    std::fprintf(stderr, "estimate written to %s (%ld steps, clamped %.4f)\n", args.out.c_str(),
                 static_cast<long>(p.cols()), est.clamped_fraction);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind per-unit power identification from thermal traces"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "Benchmark harness");
  bench->require_subcommand(1);
  BenchRunArgs run_args;
  auto* run = bench->add_subcommand("run", "Run every floorplan x strategy cell");
  run->add_option("--config", run_args.config, "Benchmark config (YAML)")->required();
  run->add_option("--out", run_args.out, "Output directory (overrides the config)");
  run->add_option("--seed", run_args.seed, "Scenario seed (overrides the config)");

  ListArgs list_args;
  auto* fps = bench->add_subcommand("floorplans", "Shipped floorplan fixtures");
  fps->add_flag("--list", list_args.list, "List fixtures")->required();
  fps->add_option("--dir", list_args.dir, "Fixture directory");

  IdentifyArgs id_args;
  auto* identify = app.add_subcommand("identify", "Offline identification of a, b, r");
  identify->add_option("--floorplan", id_args.floorplan, "Floorplan file")->required();
  identify->add_option("--init", id_args.init, "identity | bpiss | dbscan | random")
      ->capture_default_str();
  identify->add_option("--eps", id_args.eps, "DBSCAN radius (auto when omitted)");
  identify->add_option("--min-pts", id_args.min_pts, "DBSCAN MinPts (units + 1 when omitted)");
  identify->add_option("--max-iters", id_args.max_iters, "NMF sweeps")->capture_default_str();
  identify->add_option("--rel-tol", id_args.rel_tol, "NMF stopping tolerance")
      ->capture_default_str();
  identify->add_option("--nmf-seed", id_args.nmf_seed, "Seed for --init random");
  identify->add_flag("--no-settle", id_args.no_settle,
                     "Start NMF from the seed's p instead of its NNLS fit");
  identify->add_option("--steady-temps", id_args.steady_temps,
                       "Measured steady temperatures CSV (one row per observation)");
  identify->add_option("--steady-total", id_args.steady_total, "Total power per observation CSV");
  identify->add_option("--train-temps", id_args.train_temps, "Training temperature trace CSV");
  identify->add_option("--train-power", id_args.train_power, "Training per-unit power CSV");
  identify->add_option("--seed", id_args.seed, "Synthetic experiment seed")->capture_default_str();
  identify->add_option("--noise", id_args.noise, "Synthetic sensor noise sigma, K")
      ->capture_default_str();
  identify->add_option("--outliers", id_args.outliers, "Synthetic outlier count")
      ->capture_default_str();
  identify->add_option("--out", id_args.out, "Model file")->capture_default_str();
  identify->add_option("--emit-workload", id_args.emit_workload,
                       "Write the synthetic held-out workload CSVs here");

  EstimateArgs est_args;
  auto* estimate = app.add_subcommand("estimate", "Online per-unit power estimation");
  estimate->add_option("--model", est_args.model, "Model file from identify")->required();
  estimate->add_option("--temps", est_args.temps, "Temperature trace CSV")->required();
  estimate->add_option("--total-power", est_args.total_power, "Total power CSV")->required();
  estimate->add_flag("--no-rescale", est_args.no_rescale, "Skip rescaling to the total");
  estimate->add_option("--out", est_args.out, "Output CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return run_bench(run_args);
    if (*fps) return list_floorplans(list_args);
    if (*identify) return run_identify(id_args);
    if (*estimate) return run_estimate(est_args);
  } catch (const bpi::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const bpi::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
