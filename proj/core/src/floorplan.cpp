#include "bpi/floorplan.hpp"

#include <algorithm>
#include <set>

#include "bpi/types.hpp"

namespace bpi {

namespace {

void check(bool cond, const std::string& field, const std::string& msg) {
  if (!cond) throw ConfigError(field + ": " + msg);
}

}  // namespace

Floorplan Floorplan::grid(std::string name, std::size_t rows, std::size_t cols,
                          double power_budget_w, std::vector<Unit> units,
                          ThermalParams thermal, Architecture arch) {
  check(rows >= 1 && cols >= 1, "topology", "grid rows and cols must be >= 1");
  const std::size_t n = rows * cols;
  if (units.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      units.push_back({"core" + std::to_string(i), "Core " + std::to_string(i), 1.0});
    }
  }
  check(units.size() == n, "units",
        "grid " + std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
            std::to_string(n) + " units, got " + std::to_string(units.size()));

  Floorplan fp;
  fp.name_ = std::move(name);
  fp.units_ = std::move(units);
  fp.grid_ = GridShape{rows, cols};
  fp.power_budget_w_ = power_budget_w;
  fp.thermal_ = thermal;
  fp.architecture_ = arch;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (c + 1 < cols) fp.edges_.emplace_back(i, i + 1);
      if (r + 1 < rows) fp.edges_.emplace_back(i, i + cols);
    }
  }
  fp.finalize();
  return fp;
}

Floorplan Floorplan::explicit_layout(std::string name, std::vector<Unit> units,
                                     std::vector<Edge> edges, double power_budget_w,
                                     ThermalParams thermal, Architecture arch) {
  Floorplan fp;
  fp.name_ = std::move(name);
  fp.units_ = std::move(units);
  fp.edges_ = std::move(edges);
  fp.power_budget_w_ = power_budget_w;
  fp.thermal_ = thermal;
  fp.architecture_ = arch;
  fp.finalize();
  return fp;
}

void Floorplan::finalize() {
  check(!name_.empty(), "name", "must not be empty");
  check(units_.size() >= 2, "units", "need at least 2 units");
  check(power_budget_w_ > 0.0, "power_budget_w", "must be > 0");

  std::set<std::string> ids;
  for (const auto& u : units_) {
    check(!u.id.empty(), "units", "unit id must not be empty");
    check(ids.insert(u.id).second, "units", "duplicate unit id '" + u.id + "'");
    check(u.self_heat_scale > 0.0, "units", "self_heat_scale of '" + u.id + "' must be > 0");
  }
  check(thermal_.self_heat_k_per_w > 0.0, "thermal.self_heat_k_per_w", "must be > 0");
  check(thermal_.coupling >= 0.0 && thermal_.coupling < 1.0, "thermal.coupling",
        "must be in [0, 1)");
  check(thermal_.leak > 0.0 && thermal_.leak < 1.0, "thermal.leak", "must be in (0, 1)");

  adjacency_.assign(units_.size(), {});
  std::set<Edge> seen;
  for (auto [i, j] : edges_) {
    check(i < units_.size() && j < units_.size(), "topology", "edge references unknown unit");
    check(i != j, "topology", "self-adjacency on unit '" + units_[i].id + "'");
    const Edge key{std::min(i, j), std::max(i, j)};
    check(seen.insert(key).second, "topology",
          "duplicate edge " + units_[i].id + "-" + units_[j].id);
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

std::size_t Floorplan::max_degree() const {
  std::size_t d = 0;
  for (const auto& nb : adjacency_) d = std::max(d, nb.size());
  return d;
}

bool Floorplan::adjacent(std::size_t i, std::size_t j) const {
  const auto& nb = adjacency_.at(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<std::string> Floorplan::unit_ids() const {
  std::vector<std::string> ids;
  ids.reserve(units_.size());
  for (const auto& u : units_) ids.push_back(u.id);
  return ids;
}

const char* to_string(Architecture arch) {
  return arch == Architecture::homogeneous ? "homogeneous" : "heterogeneous";
}

}  // namespace bpi
