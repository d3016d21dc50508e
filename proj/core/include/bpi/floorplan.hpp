#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bpi {

struct Unit {
  std::string id;
  std::string name;
  // Multiplier on the floorplan-wide self-heating coefficient. Heterogeneous
  // layouts use it for big cores and accelerators.
  double self_heat_scale = 1.0;
};

struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

enum class Architecture { homogeneous, heterogeneous };

// Parameters of the synthetic RC ground-truth model built for a floorplan.
struct ThermalParams {
  double self_heat_k_per_w = 0.6;
  double coupling = 0.02;
  double leak = 0.1;
};

/// Chip layout: ordered units, their thermal adjacency and the power budget.
///
/// Grid floorplans use 4-neighbour adjacency in row-major unit order.
/// Explicit floorplans carry an undirected edge list. Construction validates
/// every invariant and throws ConfigError naming the offending field.
class Floorplan {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  static Floorplan grid(std::string name, std::size_t rows, std::size_t cols,
                        double power_budget_w, std::vector<Unit> units = {},
                        ThermalParams thermal = {},
                        Architecture arch = Architecture::homogeneous);

  static Floorplan explicit_layout(std::string name, std::vector<Unit> units,
                                   std::vector<Edge> edges,
                                   double power_budget_w,
                                   ThermalParams thermal = {},
                                   Architecture arch = Architecture::heterogeneous);

  const std::string& name() const { return name_; }
  const std::vector<Unit>& units() const { return units_; }
  std::size_t size() const { return units_.size(); }
  double power_budget_w() const { return power_budget_w_; }
  Architecture architecture() const { return architecture_; }
  const ThermalParams& thermal() const { return thermal_; }
  const std::optional<GridShape>& grid_shape() const { return grid_; }
  const std::vector<Edge>& edges() const { return edges_; }

  const std::vector<std::size_t>& neighbors(std::size_t unit) const {
    return adjacency_.at(unit);
  }
  std::size_t degree(std::size_t unit) const { return adjacency_.at(unit).size(); }
  std::size_t max_degree() const;
  bool adjacent(std::size_t i, std::size_t j) const;
  std::vector<std::string> unit_ids() const;

 private:
  Floorplan() = default;
  void finalize();

  std::string name_;
  std::vector<Unit> units_;
  std::optional<GridShape> grid_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  double power_budget_w_ = 0.0;
  Architecture architecture_ = Architecture::homogeneous;
  ThermalParams thermal_;
};

const char* to_string(Architecture arch);

}  // namespace bpi
