#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "msrs/core.hpp"

namespace msrs {

// Objective-space point as reported at interfaces: coverage ratio and
// lowest RTSN in dB.
struct FrontPoint {
  double coverage_ratio = 0.0;
  double lowest_rtsn_db = 0.0;
};

struct ReferencePoint {
  double coverage_ratio = 0.15;
  double lowest_rtsn_db = -15.0;
};

inline bool dominates(const FrontPoint& a, const FrontPoint& b) {
  return a.coverage_ratio >= b.coverage_ratio &&
         a.lowest_rtsn_db >= b.lowest_rtsn_db &&
         (a.coverage_ratio > b.coverage_ratio ||
          a.lowest_rtsn_db > b.lowest_rtsn_db);
}

enum class FrontObjective { coverage_ratio = 0, lowest_rtsn_db = 1 };

inline double front_value(const FrontPoint& p, FrontObjective k) {
  return k == FrontObjective::coverage_ratio ? p.coverage_ratio
                                             : p.lowest_rtsn_db;
}

struct ImprovementResult {
  // Mean improvement in objective k of the best dominating IGS point over
  // each dominated CGS point; empty when nothing in CGS is dominated.
  std::optional<double> average;
  int used = 0;     // CGS points with at least one dominator in IGS
  int skipped = 0;  // CGS points no IGS point dominates
};

// For each comparison-set point dominated by at least one improved-set
// point, takes the largest objective-k gain among its dominators, and
// averages those gains. Undominated comparison points are skipped and
// counted.
inline ImprovementResult average_improvement(std::span<const FrontPoint> igs,
                                             std::span<const FrontPoint> cgs,
                                             FrontObjective k) {
  if (cgs.empty())
    throw std::invalid_argument("average_improvement: comparison set is empty");
  ImprovementResult out;
  double total = 0.0;
  for (const FrontPoint& z : cgs) {
    bool dominated = false;
    double best_gain = 0.0;
    for (const FrontPoint& q : igs) {
      if (!dominates(q, z)) continue;
      const double gain = front_value(q, k) - front_value(z, k);
      if (!dominated || gain > best_gain) best_gain = gain;
      dominated = true;
    }
    if (dominated) {
      total += best_gain;
      ++out.used;
    } else {
      ++out.skipped;
    }
  }
  if (out.used > 0) out.average = total / static_cast<double>(out.used);
  return out;
}

// Area of objective space dominated by the front and bounding the reference
// point from above in both objectives, via a staircase sweep. Points at or
// below the reference in either objective contribute nothing; dominated or
// duplicate input points do not change the result.
inline double dominated_space(std::span<const FrontPoint> front,
                              const ReferencePoint& ref) {
  std::vector<FrontPoint> pts;
  for (const FrontPoint& p : front) {
    if (!std::isfinite(p.coverage_ratio) || !std::isfinite(p.lowest_rtsn_db))
      throw std::invalid_argument("dominated_space: non-finite front point");
    if (p.coverage_ratio > ref.coverage_ratio &&
        p.lowest_rtsn_db > ref.lowest_rtsn_db)
      pts.push_back(p);
  }
  if (pts.empty()) return 0.0;
  std::vector<FrontPoint> frontier;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t k = 0; k < pts.size() && !dominated; ++k)
      if (k != i && dominates(pts[k], pts[i])) dominated = true;
    if (!dominated) frontier.push_back(pts[i]);
  }
  std::sort(frontier.begin(), frontier.end(),
            [](const FrontPoint& a, const FrontPoint& b) {
              if (a.coverage_ratio != b.coverage_ratio)
                return a.coverage_ratio < b.coverage_ratio;
              return a.lowest_rtsn_db > b.lowest_rtsn_db;
            });
  double area = 0.0;
  double prev_cr = ref.coverage_ratio;
  for (const FrontPoint& p : frontier) {
    area += (p.coverage_ratio - prev_cr) * (p.lowest_rtsn_db - ref.lowest_rtsn_db);
    prev_cr = p.coverage_ratio;
  }
  return area;
}

}  // namespace msrs
