#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "msrs/scenario.hpp"

namespace msrs {

// Maximization dominance: at least as good in both objectives, strictly
// better in one.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  return a.coverage_ratio >= b.coverage_ratio &&
         a.lowest_rtsn >= b.lowest_rtsn &&
         (a.coverage_ratio > b.coverage_ratio ||
          a.lowest_rtsn > b.lowest_rtsn);
}

constexpr double kArchiveDuplicateTolerance = 1e-12;

inline bool objectives_near_equal(const ObjectiveVector& a,
                                  const ObjectiveVector& b) {
  return std::abs(a.coverage_ratio - b.coverage_ratio) <=
             kArchiveDuplicateTolerance &&
         std::abs(a.lowest_rtsn - b.lowest_rtsn) <= kArchiveDuplicateTolerance;
}

struct ArchiveEntry {
  DeploymentVector dv;
  ObjectiveVector objectives;
  double xi_cd = 0.0;                    // absolute crowding distance
  std::array<double, 2> cdv{0.0, 0.0};   // per-objective crowding components
  double xi_rcd = 0.0;                   // relative crowding distance
};

// Non-dominated store, kept sorted by strictly ascending coverage ratio
// (hence strictly descending lowest RTSN). Capacity 0 means unbounded;
// otherwise at least 3 so both extreme entries can always be retained.
class Archive {
 public:
  explicit Archive(std::size_t capacity = 0) : capacity_(capacity) {
    if (capacity_ != 0 && capacity_ < 3)
      throw ConfigError("optimizer.archive_capacity", "must be 0 or >= 3");
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  const ArchiveEntry& operator[](std::size_t i) const { return entries_[i]; }

  // Inserts unless the candidate is dominated or duplicates an incumbent
  // within tolerance; removes every incumbent the candidate dominates.
  bool insert(DeploymentVector dv, ObjectiveVector ov) {
    const double c = ov.coverage_ratio;
    const double l = ov.lowest_rtsn;
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), c,
        [](const ArchiveEntry& e, double value) {
          return e.objectives.coverage_ratio < value;
        });
    std::size_t p = static_cast<std::size_t>(it - entries_.begin());
    // The entry at p has the smallest coverage >= c and, by sortedness, the
    // largest lowest_rtsn among all such entries; it alone decides
    // domination of the candidate.
    if (p < entries_.size() && entries_[p].objectives.lowest_rtsn >= l)
      return false;
    if (p < entries_.size() && objectives_near_equal(entries_[p].objectives, ov))
      return false;
    if (p > 0 && objectives_near_equal(entries_[p - 1].objectives, ov))
      return false;
    std::size_t last = p;
    if (last < entries_.size() &&
        entries_[last].objectives.coverage_ratio == c)
      ++last;  // equal coverage, strictly lower rtsn: dominated
    std::size_t first = last;
    while (first > 0 && entries_[first - 1].objectives.lowest_rtsn <= l)
      --first;
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(first),
                   entries_.begin() + static_cast<std::ptrdiff_t>(last));
    ArchiveEntry e;
    e.dv = std::move(dv);
    e.objectives = ov;
    entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(first),
                    std::move(e));
    return true;
  }

  void erase(std::size_t i) {
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
  }

 private:
  friend void annotate_crowding(Archive&, const struct CrowdingNormalization&);
  std::vector<ArchiveEntry> entries_;
  std::size_t capacity_;
};

// Absolute crowding distance: each interior entry gets the L1 span of its
// two neighbors' objectives; both boundary entries get the interior maximum.
// Fewer than 3 entries: all zero.
inline std::vector<double> crowding_absolute(const Archive& archive) {
  const auto& e = archive.entries();
  const std::size_t n = e.size();
  std::vector<double> xi(n, 0.0);
  if (n < 3) return xi;
  double interior_max = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const ObjectiveVector& lo = e[i - 1].objectives;
    const ObjectiveVector& hi = e[i + 1].objectives;
    xi[i] = std::abs(hi.coverage_ratio - lo.coverage_ratio) +
            std::abs(hi.lowest_rtsn - lo.lowest_rtsn);
    interior_max = std::max(interior_max, xi[i]);
  }
  xi[0] = interior_max;
  xi[n - 1] = interior_max;
  return xi;
}

// Ranges used to normalize per-objective crowding components. archive_range
// (the default) spans the archive itself; nominal ranges support fixed
// objective scales.
struct CrowdingNormalization {
  bool use_archive_range = true;
  std::array<double, 2> ranges{0.0, 0.0};

  static CrowdingNormalization archive_range() { return {true, {0.0, 0.0}}; }
  static CrowdingNormalization nominal(double coverage_range,
                                       double rtsn_range) {
    return {false, {coverage_range, rtsn_range}};
  }
};

struct CrowdingVectors {
  std::vector<std::array<double, 2>> cdv;
  std::vector<double> xi_rcd;
};

// Per-objective crowding components (interior: neighbor span per objective;
// boundary: twice the gap to the sole neighbor) and their range-normalized
// sums. Fewer than 3 entries: all zero.
inline CrowdingVectors crowding_vectors(const Archive& archive,
                                        const CrowdingNormalization& norm) {
  const auto& e = archive.entries();
  const std::size_t n = e.size();
  CrowdingVectors out;
  out.cdv.assign(n, {0.0, 0.0});
  out.xi_rcd.assign(n, 0.0);
  if (n < 3) return out;

  auto g = [&](std::size_t i, int k) {
    return k == 0 ? e[i].objectives.coverage_ratio : e[i].objectives.lowest_rtsn;
  };
  for (int k = 0; k < 2; ++k) {
    for (std::size_t i = 1; i + 1 < n; ++i)
      out.cdv[i][static_cast<std::size_t>(k)] =
          std::abs(g(i + 1, k) - g(i - 1, k));
    out.cdv[0][static_cast<std::size_t>(k)] = 2.0 * std::abs(g(1, k) - g(0, k));
    out.cdv[n - 1][static_cast<std::size_t>(k)] =
        2.0 * std::abs(g(n - 1, k) - g(n - 2, k));
  }

  std::array<double, 2> ranges = norm.ranges;
  if (norm.use_archive_range) {
    for (int k = 0; k < 2; ++k) {
      double mn = g(0, k), mx = g(0, k);
      for (std::size_t i = 1; i < n; ++i) {
        mn = std::min(mn, g(i, k));
        mx = std::max(mx, g(i, k));
      }
      ranges[static_cast<std::size_t>(k)] = mx - mn;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 2; ++k)
      if (ranges[k] > 0.0) sum += out.cdv[i][k] / ranges[k];
    out.xi_rcd[i] = sum;
  }
  return out;
}

inline void annotate_crowding(Archive& archive,
                              const CrowdingNormalization& norm) {
  const std::vector<double> xi = crowding_absolute(archive);
  const CrowdingVectors cv = crowding_vectors(archive, norm);
  for (std::size_t i = 0; i < archive.entries_.size(); ++i) {
    archive.entries_[i].xi_cd = xi[i];
    archive.entries_[i].cdv = cv.cdv[i];
    archive.entries_[i].xi_rcd = cv.xi_rcd[i];
  }
}

namespace detail {

// Drops the least separated interior entry (smallest relative crowding
// distance, ties toward the lower index). Boundary entries are never
// dropped.
inline void enforce_capacity(Archive& archive) {
  if (archive.capacity() == 0) return;
  while (archive.size() > archive.capacity()) {
    const CrowdingVectors cv =
        crowding_vectors(archive, CrowdingNormalization::archive_range());
    std::size_t victim = 1;
    for (std::size_t i = 2; i + 1 < archive.size(); ++i)
      if (cv.xi_rcd[i] < cv.xi_rcd[victim]) victim = i;
    archive.erase(victim);
  }
}

}  // namespace detail

// Merges candidates into the archive; the result is the non-dominated subset
// of the union (then capacity-pruned), independent of candidate order.
// Entries leave with fresh crowding annotations.
inline void archive_update(
    Archive& archive,
    std::span<const std::pair<DeploymentVector, ObjectiveVector>> candidates) {
  for (const auto& [dv, ov] : candidates) archive.insert(dv, ov);
  detail::enforce_capacity(archive);
  annotate_crowding(archive, CrowdingNormalization::archive_range());
}

}  // namespace msrs
