#include "bpi/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

namespace bpi {

namespace {

std::string where(std::string_view source, const YAML::Node& node) {
  std::string s(source);
  const auto mark = node.Mark();
  if (!mark.is_null()) s += ":" + std::to_string(mark.line + 1);
  return s;
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& allowed,
                    std::string_view source, const std::string& context) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError(where(source, kv.first) + ": unknown key '" + context + key + "'");
    }
  }
}

template <class T>
T scalar(const YAML::Node& node, std::string_view source, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(source, node) + ": " + field + ": invalid value");
  }
}

template <class T>
T required(const YAML::Node& map, const std::string& key, std::string_view source,
           const std::string& context = "") {
  const YAML::Node node = map[key];
  if (!node) throw ConfigError(std::string(source) + ": " + context + key + ": missing");
  return scalar<T>(node, source, context + key);
}

ThermalParams parse_thermal(const YAML::Node& node, std::string_view source) {
  ThermalParams t;
  if (!node) return t;
  if (!node.IsMap()) throw ConfigError(where(source, node) + ": thermal: expected a mapping");
  reject_unknown(node, {"self_heat_k_per_w", "coupling", "leak"}, source, "thermal.");
  if (node["self_heat_k_per_w"]) t.self_heat_k_per_w = scalar<double>(node["self_heat_k_per_w"], source, "thermal.self_heat_k_per_w");
  if (node["coupling"]) t.coupling = scalar<double>(node["coupling"], source, "thermal.coupling");
  if (node["leak"]) t.leak = scalar<double>(node["leak"], source, "thermal.leak");
  return t;
}

Floorplan build_floorplan(const YAML::Node& root, std::string_view source) {
  if (!root.IsMap()) throw ConfigError(std::string(source) + ": expected a mapping at top level");
  reject_unknown(root, {"name", "architecture", "power_budget_w", "topology", "units", "thermal"},
                 source, "");

  const auto name = required<std::string>(root, "name", source);
  const auto budget = required<double>(root, "power_budget_w", source);
  const ThermalParams thermal = parse_thermal(root["thermal"], source);

  std::vector<Unit> units;
  if (const YAML::Node list = root["units"]) {
    if (!list.IsSequence()) throw ConfigError(where(source, list) + ": units: expected a list");
    for (const auto& item : list) {
      if (!item.IsMap()) throw ConfigError(where(source, item) + ": units: expected a mapping");
      reject_unknown(item, {"id", "name", "self_heat_scale"}, source, "units.");
      Unit u;
      u.id = required<std::string>(item, "id", source, "units.");
      u.name = item["name"] ? scalar<std::string>(item["name"], source, "units.name") : u.id;
      if (item["self_heat_scale"]) {
        u.self_heat_scale = scalar<double>(item["self_heat_scale"], source, "units.self_heat_scale");
      }
      units.push_back(std::move(u));
    }
  }

  const YAML::Node topo = root["topology"];
  if (!topo || !topo.IsMap()) {
    throw ConfigError(std::string(source) + ": topology: missing or not a mapping");
  }
  reject_unknown(topo, {"grid", "adjacency"}, source, "topology.");
  if (static_cast<bool>(topo["grid"]) == static_cast<bool>(topo["adjacency"])) {
    throw ConfigError(where(source, topo) + ": topology: exactly one of grid or adjacency required");
  }

  std::optional<Architecture> arch;
  if (const YAML::Node a = root["architecture"]) {
    const auto s = scalar<std::string>(a, source, "architecture");
    if (s == "homogeneous") arch = Architecture::homogeneous;
    else if (s == "heterogeneous") arch = Architecture::heterogeneous;
    else throw ConfigError(where(source, a) + ": architecture: expected homogeneous or heterogeneous");
  }

  if (const YAML::Node grid = topo["grid"]) {
    reject_unknown(grid, {"rows", "cols"}, source, "topology.grid.");
    const auto rows = required<long>(grid, "rows", source, "topology.grid.");
    const auto cols = required<long>(grid, "cols", source, "topology.grid.");
    if (rows < 1 || cols < 1) throw ConfigError(where(source, grid) + ": topology.grid: rows and cols must be >= 1");
    return Floorplan::grid(name, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                           budget, std::move(units), thermal,
                           arch.value_or(Architecture::homogeneous));
  }

  const YAML::Node adj = topo["adjacency"];
  if (!adj.IsSequence()) throw ConfigError(where(source, adj) + ": topology.adjacency: expected a list of pairs");
  if (units.empty()) throw ConfigError(std::string(source) + ": units: required for adjacency topologies");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < units.size(); ++i) index.emplace(units[i].id, i);
  std::vector<Floorplan::Edge> edges;
  for (const auto& pair : adj) {
    if (!pair.IsSequence() || pair.size() != 2) {
      throw ConfigError(where(source, pair) + ": topology.adjacency: each entry must be [id, id]");
    }
    const auto a = scalar<std::string>(pair[0], source, "topology.adjacency");
    const auto b = scalar<std::string>(pair[1], source, "topology.adjacency");
    if (!index.count(a) || !index.count(b)) {
      throw ConfigError(where(source, pair) + ": topology.adjacency: unknown unit id in [" + a +
                        ", " + b + "]");
    }
    edges.emplace_back(index.at(a), index.at(b));
  }
  return Floorplan::explicit_layout(name, std::move(units), std::move(edges), budget, thermal,
                                    arch.value_or(Architecture::heterogeneous));
}

std::string format_fixed(double v, int digits) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -digits)) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, Index n, const std::string& field) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n) {
    throw ConfigError("model: " + field + ": expected " + std::to_string(n) + " rows");
  }
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) {
      throw ConfigError("model: " + field + ": row " + std::to_string(i) + " must have " +
                        std::to_string(n) + " entries");
    }
    for (Index c = 0; c < n; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

Floorplan parse_floorplan_text(std::string_view text, std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string(source) + ":" + std::to_string(e.mark.line + 1) +
                      ": syntax error: " + e.msg);
  }
  try {
    return build_floorplan(root, source);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(std::string(source), 0) == 0) throw;
    throw ConfigError(std::string(source) + ": " + msg);
  }
}

Floorplan parse_floorplan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open floorplan file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_floorplan_text(buf.str(), path.string());
}

void write_trace_csv(std::ostream& out, const Matrix& values,
                     const std::vector<std::string>& unit_ids, Index first_step, int digits) {
  require(static_cast<Index>(unit_ids.size()) == values.rows(),
          "write_trace_csv: unit id count != rows");
  require(digits >= kTraceDigits, "write_trace_csv: need at least 6 fractional digits");
  out << "step";
  for (const auto& id : unit_ids) out << ',' << id;
  out << '\n';
  for (Index k = 0; k < values.cols(); ++k) {
    out << (first_step + k);
    for (Index i = 0; i < values.rows(); ++i) out << ',' << format_fixed(values(i, k), digits);
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const Matrix& values,
                     const std::vector<std::string>& unit_ids, Index first_step, int digits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput(path.string() + ": cannot open for writing");
  write_trace_csv(out, values, unit_ids, first_step, digits);
  if (!out) throw InvalidInput(path.string() + ": write failed");
}

CsvTrace read_trace_csv(std::istream& in, std::string_view source) {
  CsvTrace out;
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& msg) -> ConfigError {
    return ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(in, line)) throw ConfigError(std::string(source) + ": empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv(line);
  if (header.empty() || header[0] != "step") throw fail("header must start with 'step'");
  out.columns.assign(header.begin() + 1, header.end());
  if (out.columns.empty()) throw fail("no value columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw fail("expected " + std::to_string(header.size()) + " fields, got " +
                 std::to_string(cells.size()));
    }
    long long step = 0;
    {
      const auto& c = cells[0];
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), step);
      if (ec != std::errc() || p != c.data() + c.size()) throw fail("bad step '" + c + "'");
    }
    out.steps.push_back(step);
    std::vector<double> row(out.columns.size());
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const auto& c = cells[i];
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), row[i - 1]);
      if (ec != std::errc() || p != c.data() + c.size()) throw fail("bad number '" + c + "'");
    }
    rows.push_back(std::move(row));
  }
  out.values.resize(static_cast<Index>(out.columns.size()), static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < out.columns.size(); ++i) {
      out.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[k][i];
    }
  }
  return out;
}

CsvTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open trace file");
  return read_trace_csv(in, path.string());
}

void save_model(const std::filesystem::path& path, const IdentifiedModel& model) {
  nlohmann::json j;
  j["format"] = "bpi-model/1";
  j["init_strategy"] = std::string(to_string(model.init_strategy));
  j["unit_ids"] = model.unit_ids;
  j["a"] = matrix_to_json(model.matrices.a);
  j["b"] = matrix_to_json(model.matrices.b);
  j["r"] = matrix_to_json(model.matrices.r);
  const auto& d = model.diagnostics;
  j["diagnostics"] = {
      {"nmf_iters", d.nmf_iters},
      {"observations", d.observations},
      {"kept_observations", d.kept_observations},
      {"a_fit_residual", d.a_fit_residual},
      {"steady_residual", d.steady_residual},
      {"model_residual", d.model_residual},
      {"final_objective", d.objective_history.empty() ? 0.0 : d.objective_history.back()},
      {"notes", d.notes},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput(path.string() + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

IdentifiedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open model file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    if (j.value("format", "") != "bpi-model/1") {
      throw ConfigError(path.string() + ": not a bpi-model/1 file");
    }
    IdentifiedModel m;
    m.unit_ids = j.at("unit_ids").get<std::vector<std::string>>();
    m.init_strategy = parse_strategy(j.at("init_strategy").get<std::string>());
    const auto n = static_cast<Index>(m.unit_ids.size());
    m.matrices.a = matrix_from_json(j.at("a"), n, "a");
    m.matrices.b = matrix_from_json(j.at("b"), n, "b");
    m.matrices.r = matrix_from_json(j.at("r"), n, "r");
    validate_model(m.matrices, false);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace bpi
