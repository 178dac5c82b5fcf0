#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "msrs/core.hpp"
#include "msrs/detection.hpp"
#include "msrs/rng.hpp"

namespace msrs {

// World description: the surveyed area, the node placement area, and the
// radar/detection parameters shared by every candidate deployment.
struct Scenario {
  Region surveillance{50.0, 50.0};
  Region placement{50.0, 50.0};
  double cell_area_km2 = 2.5;
  int num_nodes = 5;
  Mode mode = Mode::cooperative;
  double d0 = 17.782794100389228;  // detectability factor, linear (12.5 dB)
  double r_max_km = 6.0;
  double sigma = 1.0;  // reference cross-section
  double p_dt = 0.8;
  double p_fa = 1e-6;
  RcsModel rcs_model = RcsModel::deterministic;
  std::uint64_t rcs_seed = 1;
  double min_range_km = 0.1;
};

inline void validate_scenario(const Scenario& sc) {
  auto positive = [](const char* field, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(field, "must be a positive finite number");
  };
  positive("scenario.region_width_km", sc.surveillance.width_km);
  positive("scenario.region_height_km", sc.surveillance.height_km);
  positive("scenario.placement_width_km", sc.placement.width_km);
  positive("scenario.placement_height_km", sc.placement.height_km);
  positive("scenario.cell_area_km2", sc.cell_area_km2);
  positive("scenario.r_max_km", sc.r_max_km);
  positive("scenario.sigma", sc.sigma);
  positive("scenario.min_range_km", sc.min_range_km);
  positive("scenario.d0", sc.d0);
  if (sc.num_nodes < 1) throw ConfigError("scenario.num_nodes", "must be >= 1");
  if (!(sc.p_dt > 0.0 && sc.p_dt < 1.0))
    throw ConfigError("scenario.p_dt", "must lie in (0, 1)");
  if (!(sc.p_fa > 0.0 && sc.p_fa < 1.0))
    throw ConfigError("scenario.p_fa", "must lie in (0, 1)");
  if (sc.cell_area_km2 > sc.surveillance.width_km * sc.surveillance.height_km)
    throw ConfigError("scenario.cell_area_km2",
                      "exceeds the surveillance region area");
}

struct GridSpec {
  int columns = 0;
  long long cells = 0;
  double side_km = 0.0;
};

// Square-cell lattice over the surveillance region: side sqrt(cell_area),
// floor(area / cell_area) cells total, laid out row-major from the region
// origin (x fastest). The column count is the nearest integer to
// width / side; every emitted center must land inside the region.
inline GridSpec grid_spec(const Scenario& sc) {
  validate_scenario(sc);
  const Region& r = sc.surveillance;
  const double area = r.width_km * r.height_km;
  const double side = std::sqrt(sc.cell_area_km2);
  const long long cells =
      static_cast<long long>(std::floor(area / sc.cell_area_km2 + 1e-9));
  long long columns = std::llround(r.width_km / side);
  if (columns < 1) columns = 1;
  const long long rows = (cells + columns - 1) / columns;
  const double slack = 1e-9 * side;
  if ((static_cast<double>(columns) - 0.5) * side > r.width_km + slack ||
      (static_cast<double>(rows) - 0.5) * side > r.height_km + slack)
    throw ConfigError("scenario.cell_area_km2",
                      "region dimensions do not admit a lattice of "
                      "floor(area / cell_area) cell centers");
  return {static_cast<int>(columns), cells, side};
}

inline std::vector<Point> grid_cells(const Scenario& sc) {
  const GridSpec spec = grid_spec(sc);
  const Point o = sc.surveillance.origin;
  std::vector<Point> centers;
  centers.reserve(static_cast<std::size_t>(spec.cells));
  for (long long u = 0; u < spec.cells; ++u) {
    const long long col = u % spec.columns;
    const long long row = u / spec.columns;
    centers.push_back({o.x + (static_cast<double>(col) + 0.5) * spec.side_km,
                       o.y + (static_cast<double>(row) + 0.5) * spec.side_km});
  }
  return centers;
}

// One candidate deployment: node positions plus per-node transmit power
// ratios that sum to the node count (equal split is all-ones).
struct DeploymentVector {
  std::vector<Point> positions;
  std::vector<double> power_ratios;
};

inline void validate_deployment(const DeploymentVector& dv,
                                const Scenario& sc) {
  const std::size_t j = static_cast<std::size_t>(sc.num_nodes);
  if (dv.positions.size() != j)
    throw ConfigError("deployment.positions",
                      "expected one position per node");
  if (dv.power_ratios.size() != j)
    throw ConfigError("deployment.power_ratios",
                      "expected one power ratio per node");
  for (const Point& p : dv.positions)
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !sc.placement.contains(p))
      throw ConfigError("deployment.positions",
                        "position outside the placement region");
  double sum = 0.0;
  for (double rho : dv.power_ratios) {
    if (!std::isfinite(rho) || rho < 0.0)
      throw ConfigError("deployment.power_ratios",
                        "power ratios must be finite and >= 0");
    sum += rho;
  }
  if (std::abs(sum - static_cast<double>(j)) > 1e-9)
    throw ConfigError("deployment.power_ratios",
                      "power ratios must sum to the node count");
}

// The two maximized objectives. lowest_rtsn stays linear internally; dB
// conversion happens only at reporting interfaces.
struct ObjectiveVector {
  double coverage_ratio = 0.0;
  double lowest_rtsn = 0.0;
};

// Per-pair cross-section table, fixed for the lifetime of an experiment.
class RcsTable {
 public:
  RcsTable(int num_nodes, std::vector<double> values)
      : num_nodes_(num_nodes), values_(std::move(values)) {
    if (values_.size() !=
        static_cast<std::size_t>(num_nodes_) * static_cast<std::size_t>(num_nodes_))
      throw std::invalid_argument("RcsTable: values must be num_nodes^2");
  }
  int num_nodes() const { return num_nodes_; }
  double at(int m, int n) const {
    return values_[static_cast<std::size_t>(m) * num_nodes_ + n];
  }

 private:
  int num_nodes_;
  std::vector<double> values_;
};

// deterministic: every pair sees the reference cross-section. rayleigh:
// unit-mean |alpha|^2 draws from the scenario's own seed, frozen for the
// whole experiment so all algorithms and repetitions face the same world.
inline RcsTable make_rcs_table(const Scenario& sc) {
  const int j = sc.num_nodes;
  std::vector<double> v(static_cast<std::size_t>(j) * j, sc.sigma);
  if (sc.rcs_model == RcsModel::rayleigh) {
    Rng rng(derive_seed(sc.rcs_seed, Stream::rcs));
    for (double& x : v) {
      const double g1 = rng.gaussian();
      const double g2 = rng.gaussian();
      x = 0.5 * (g1 * g1 + g2 * g2) * sc.sigma;
    }
  }
  return RcsTable(j, std::move(v));
}

namespace detail {

inline double pair_rtsn_impl(const DeploymentVector& dv, int m, int n,
                             Point cell, const Scenario& sc,
                             const RcsTable& rcs) {
  const double rt = std::max(distance(dv.positions[m], cell), sc.min_range_km);
  const double rr = std::max(distance(dv.positions[n], cell), sc.min_range_km);
  const double rmax2 = sc.r_max_km * sc.r_max_km;
  return sc.d0 * dv.power_ratios[m] * rcs.at(m, n) * (rmax2 * rmax2) /
         (sc.sigma * (rt * rt) * (rr * rr));
}

}  // namespace detail

// RTSN contributed at a cell by transmitter m and receiver n. Ranges are
// clamped below min_range_km so a node sitting on a cell center stays
// finite.
inline double pair_rtsn(const DeploymentVector& dv, int m, int n, Point cell,
                        const Scenario& sc, const RcsTable& rcs) {
  if (m < 0 || n < 0 || m >= sc.num_nodes || n >= sc.num_nodes)
    throw std::out_of_range("pair_rtsn: node index out of range");
  return detail::pair_rtsn_impl(dv, m, n, cell, sc, rcs);
}

// Cell-level RTSN: cooperative mode integrates all J^2 transmit/receive
// pairs (fixed m-outer, n-inner summation order); non-cooperative mode takes
// the best monostatic pair.
inline double cell_rtsn(const DeploymentVector& dv, Point cell,
                        const Scenario& sc, const RcsTable& rcs) {
  const int j = sc.num_nodes;
  if (sc.mode == Mode::cooperative) {
    double total = 0.0;
    for (int m = 0; m < j; ++m)
      for (int n = 0; n < j; ++n)
        total += detail::pair_rtsn_impl(dv, m, n, cell, sc, rcs);
    return total;
  }
  double best = 0.0;
  for (int m = 0; m < j; ++m)
    best = std::max(best, detail::pair_rtsn_impl(dv, m, m, cell, sc, rcs));
  return best;
}

inline ObjectiveVector evaluate(const DeploymentVector& dv, const Scenario& sc,
                                const RcsTable& rcs, const DetectorConfig& det,
                                std::span<const Point> cells) {
  if (cells.empty())
    throw std::invalid_argument("evaluate: cell list is empty");
  long long covered = 0;
  double lowest = std::numeric_limits<double>::infinity();
  for (const Point& cell : cells) {
    const double rtsn = cell_rtsn(dv, cell, sc, rcs);
    if (detection_probability(rtsn, det) >= sc.p_dt) ++covered;
    if (rtsn < lowest) lowest = rtsn;
  }
  return {static_cast<double>(covered) / static_cast<double>(cells.size()),
          lowest};
}

inline ObjectiveVector evaluate(const DeploymentVector& dv, const Scenario& sc,
                                const RcsTable& rcs,
                                const DetectorConfig& det) {
  const std::vector<Point> cells = grid_cells(sc);
  return evaluate(dv, sc, rcs, det, cells);
}

}  // namespace msrs
