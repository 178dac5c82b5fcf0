#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "msrs/archive.hpp"
#include "msrs/rng.hpp"

namespace msrs {

enum class Algorithm { mopso_cd, mopso_nrcd, random_deployment };

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::mopso_nrcd;
  int swarm_size = 200;       // single-swarm particle count (mopso_cd)
  int main_swarm_size = 100;  // multi-objective swarm (mopso_nrcd)
  int sub_swarm_size = 50;    // each single-objective helper swarm
  int t_max = 2000;
  double c1 = 2.0;
  double c2 = 2.0;
  double v_max = 4.0;
  std::vector<double> v_max_per_dim;  // optional; overrides v_max when set
  double w_start = 0.9;
  double w_delta = 0.5;
  int y_max = 3;  // leader group cap (mopso_nrcd)
  std::size_t archive_capacity = 0;
  int random_count = 50;  // deployments drawn by random_deployment
  int snapshot_every = 0;
  std::uint64_t seed = 1;
};

inline void validate_optimizer_config(const OptimizerConfig& cfg) {
  if (cfg.t_max < 0) throw ConfigError("optimizer.t_max", "must be >= 0");
  if (cfg.swarm_size < 1)
    throw ConfigError("optimizer.swarm_size", "must be >= 1");
  if (cfg.main_swarm_size < 1)
    throw ConfigError("optimizer.main_swarm_size", "must be >= 1");
  if (cfg.sub_swarm_size < 1)
    throw ConfigError("optimizer.sub_swarm_size", "must be >= 1");
  if (!(cfg.c1 > 0.0) || !std::isfinite(cfg.c1))
    throw ConfigError("optimizer.c1", "must be > 0");
  if (!(cfg.c2 > 0.0) || !std::isfinite(cfg.c2))
    throw ConfigError("optimizer.c2", "must be > 0");
  if (!(cfg.v_max > 0.0) || !std::isfinite(cfg.v_max))
    throw ConfigError("optimizer.v_max", "must be > 0");
  for (double v : cfg.v_max_per_dim)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("optimizer.v_max_per_dim", "entries must be > 0");
  if (!(cfg.w_start > cfg.w_delta) || !(cfg.w_delta >= 0.0))
    throw ConfigError("optimizer.w_start",
                      "requires w_start > w_delta >= 0");
  if (cfg.y_max < 1) throw ConfigError("optimizer.y_max", "must be >= 1");
  if (cfg.archive_capacity != 0 && cfg.archive_capacity < 3)
    throw ConfigError("optimizer.archive_capacity", "must be 0 or >= 3");
  if (cfg.random_count < 1)
    throw ConfigError("optimizer.random_count", "must be >= 1");
  if (cfg.snapshot_every < 0)
    throw ConfigError("run.snapshot_every", "must be >= 0");
}

// Decision variables flatten as x_1..x_J, y_1..y_J, rho_1..rho_J.
inline std::vector<double> flatten(const DeploymentVector& dv) {
  const std::size_t j = dv.positions.size();
  std::vector<double> out(3 * j);
  for (std::size_t i = 0; i < j; ++i) {
    out[i] = dv.positions[i].x;
    out[j + i] = dv.positions[i].y;
    out[2 * j + i] = dv.power_ratios[i];
  }
  return out;
}

inline DeploymentVector unflatten(std::span<const double> position,
                                  int num_nodes) {
  const std::size_t j = static_cast<std::size_t>(num_nodes);
  DeploymentVector dv;
  dv.positions.resize(j);
  dv.power_ratios.resize(j);
  for (std::size_t i = 0; i < j; ++i) {
    dv.positions[i] = {position[i], position[j + i]};
    dv.power_ratios[i] = position[2 * j + i];
  }
  return dv;
}

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> pbest_position;
  ObjectiveVector pbest_objectives;
};

inline double inertia_weight(const OptimizerConfig& cfg, int t) {
  if (cfg.t_max <= 0) return cfg.w_start;
  return cfg.w_start -
         cfg.w_delta * (static_cast<double>(t) / static_cast<double>(cfg.t_max));
}

// Projects a flat decision vector back into the feasible set: coordinates
// clamp to the placement region (a clamped coordinate zeroes its velocity
// component), power ratios clamp to >= 0 and rescale to sum J. If every
// ratio clamps to zero the split resets to uniform.
inline void repair_in_place(std::vector<double>& position,
                            std::vector<double>& velocity,
                            const Region& placement, int num_nodes) {
  const std::size_t j = static_cast<std::size_t>(num_nodes);
  for (std::size_t i = 0; i < j; ++i) {
    const double cx = placement.clamp_x(position[i]);
    if (cx != position[i]) {
      position[i] = cx;
      velocity[i] = 0.0;
    }
    const double cy = placement.clamp_y(position[j + i]);
    if (cy != position[j + i]) {
      position[j + i] = cy;
      velocity[j + i] = 0.0;
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < j; ++i) {
    double& rho = position[2 * j + i];
    if (rho < 0.0) rho = 0.0;
    sum += rho;
  }
  if (sum <= 0.0) {
    for (std::size_t i = 0; i < j; ++i) position[2 * j + i] = 1.0;
  } else {
    const double scale = static_cast<double>(j) / sum;
    for (std::size_t i = 0; i < j; ++i) position[2 * j + i] *= scale;
  }
}

// One velocity/position step against the given leader. Consumes exactly two
// fresh uniform vectors from rng (all of r1, then all of r2, in dimension
// order); the result is feasible.
inline void update_particle(Particle& p, std::span<const double> gbest, int t,
                            const OptimizerConfig& cfg, const Region& placement,
                            int num_nodes, Rng& rng) {
  const std::size_t dims = p.position.size();
  if (gbest.size() != dims)
    throw OptimizerStateError("update_particle: leader dimension mismatch");
  const double w = inertia_weight(cfg, t);
  std::vector<double> r1(dims);
  for (std::size_t d = 0; d < dims; ++d) r1[d] = rng.uniform();
  for (std::size_t d = 0; d < dims; ++d) {
    const double r2 = rng.uniform();
    const double vmax =
        cfg.v_max_per_dim.size() == dims ? cfg.v_max_per_dim[d] : cfg.v_max;
    double v = w * p.velocity[d] +
               cfg.c1 * r1[d] * (p.pbest_position[d] - p.position[d]) +
               cfg.c2 * r2 * (gbest[d] - p.position[d]);
    v = std::clamp(v, -vmax, vmax);
    p.velocity[d] = v;
    p.position[d] += v;
  }
  repair_in_place(p.position, p.velocity, placement, num_nodes);
}

// The personal best moves only when the new objectives dominate it; on ties
// or mutual non-domination the stored best stays.
inline void update_pbest(Particle& p, const ObjectiveVector& objectives) {
  if (dominates(objectives, p.pbest_objectives)) {
    p.pbest_position = p.position;
    p.pbest_objectives = objectives;
  }
}

// Crowding-distance leader draw: uniform among the top ceil(10%) entries
// ranked by absolute crowding distance, ties broken toward the lower archive
// index; with fewer than 3 entries all are equally eligible. Always consumes
// one draw.
inline std::size_t select_leader_cd(const Archive& archive, Rng& rng) {
  if (archive.empty())
    throw OptimizerStateError("select_leader_cd: archive is empty");
  const std::size_t n = archive.size();
  const double u = rng.uniform();
  if (n < 3) return static_cast<std::size_t>(u * static_cast<double>(n));
  const std::vector<double> xi = crowding_absolute(archive);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (xi[a] != xi[b]) return xi[a] > xi[b];
    return a < b;
  });
  const std::size_t top = (n + 9) / 10;
  std::size_t pick = static_cast<std::size_t>(u * static_cast<double>(top));
  if (pick >= top) pick = top - 1;
  return order[pick];
}

struct SelectionResult {
  std::vector<std::size_t> leaders;  // archive indices, ascending
  std::vector<int> group_sizes;      // one per leader, sums to the swarm size
};

namespace detail {

// Largest-remainder apportionment with a floor of one seat per group.
// All-zero weights split evenly. Requires total >= weights.size().
inline std::vector<int> largest_remainder(const std::vector<double>& weights,
                                          int total) {
  const std::size_t y = weights.size();
  std::vector<double> quota(y);
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  for (std::size_t i = 0; i < y; ++i)
    quota[i] = wsum > 0.0
                   ? static_cast<double>(total) * weights[i] / wsum
                   : static_cast<double>(total) / static_cast<double>(y);
  std::vector<int> out(y);
  int assigned = 0;
  for (std::size_t i = 0; i < y; ++i) {
    out[i] = static_cast<int>(std::floor(quota[i]));
    assigned += out[i];
  }
  std::vector<std::size_t> order(y);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = quota[a] - std::floor(quota[a]);
    const double fb = quota[b] - std::floor(quota[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned)
    ++out[order[i % y]];
  // every group fields at least one particle
  for (std::size_t i = 0; i < y; ++i) {
    while (out[i] == 0) {
      std::size_t donor = 0;
      for (std::size_t k = 1; k < y; ++k)
        if (out[k] > out[donor]) donor = k;
      --out[donor];
      ++out[i];
    }
  }
  return out;
}

}  // namespace detail

// Leader set for the grouped swarm: candidates are the entries whose
// per-objective crowding vectors are mutually non-dominated; of those, the
// y_max largest by relative crowding distance lead (ties toward the lower
// archive index), and the swarm is apportioned to them by largest remainder
// proportional to their relative crowding distances.
inline SelectionResult select_leaders_nrcd(const Archive& archive,
                                           int main_swarm_size, int y_max) {
  if (archive.empty())
    throw OptimizerStateError("select_leaders_nrcd: archive is empty");
  if (main_swarm_size < 1)
    throw ConfigError("optimizer.main_swarm_size", "must be >= 1");
  if (y_max < 1) throw ConfigError("optimizer.y_max", "must be >= 1");

  const std::size_t n = archive.size();
  const CrowdingVectors cv =
      crowding_vectors(archive, CrowdingNormalization::archive_range());

  auto cdv_dominates = [](const std::array<double, 2>& a,
                          const std::array<double, 2>& b) {
    return a[0] >= b[0] && a[1] >= b[1] && (a[0] > b[0] || a[1] > b[1]);
  };
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    bool dominated = false;
    for (std::size_t k = 0; k < n && !dominated; ++k)
      if (k != i && cdv_dominates(cv.cdv[k], cv.cdv[i])) dominated = true;
    if (!dominated) candidates.push_back(i);
  }

  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) {
              if (cv.xi_rcd[a] != cv.xi_rcd[b])
                return cv.xi_rcd[a] > cv.xi_rcd[b];
              return a < b;
            });
  std::size_t y = std::min({candidates.size(),
                            static_cast<std::size_t>(y_max),
                            static_cast<std::size_t>(main_swarm_size)});
  SelectionResult sel;
  sel.leaders.assign(candidates.begin(),
                     candidates.begin() + static_cast<std::ptrdiff_t>(y));
  std::sort(sel.leaders.begin(), sel.leaders.end());
  std::vector<double> weights(y);
  for (std::size_t i = 0; i < y; ++i) weights[i] = cv.xi_rcd[sel.leaders[i]];
  sel.group_sizes = detail::largest_remainder(weights, main_swarm_size);
  return sel;
}

struct ArchiveSnapshot {
  int iteration = 0;
  std::vector<ObjectiveVector> objectives;
};

struct RunOutput {
  Archive archive{0};
  std::vector<ArchiveSnapshot> snapshots;
  // Rows reported to result files: the archive for the swarm algorithms,
  // every sampled deployment for random_deployment. Sorted by ascending
  // coverage ratio, then lowest RTSN.
  std::vector<std::pair<DeploymentVector, ObjectiveVector>> solutions;
};

namespace detail {

inline std::vector<double> random_position(Rng& rng, const Region& placement,
                                           int num_nodes) {
  const std::size_t j = static_cast<std::size_t>(num_nodes);
  std::vector<double> pos(3 * j);
  for (std::size_t i = 0; i < j; ++i)
    pos[i] = rng.uniform(placement.origin.x,
                         placement.origin.x + placement.width_km);
  for (std::size_t i = 0; i < j; ++i)
    pos[j + i] = rng.uniform(placement.origin.y,
                             placement.origin.y + placement.height_km);
  // uniform point on the scaled simplex sum(rho) = J
  double sum = 0.0;
  for (std::size_t i = 0; i < j; ++i) {
    pos[2 * j + i] = rng.exponential();
    sum += pos[2 * j + i];
  }
  if (sum <= 0.0) {
    for (std::size_t i = 0; i < j; ++i) pos[2 * j + i] = 1.0;
  } else {
    const double scale = static_cast<double>(j) / sum;
    for (std::size_t i = 0; i < j; ++i) pos[2 * j + i] *= scale;
  }
  return pos;
}

inline Particle init_particle(Rng& rng, const OptimizerConfig& cfg,
                              const Region& placement, int num_nodes) {
  Particle p;
  p.position = random_position(rng, placement, num_nodes);
  const std::size_t dims = p.position.size();
  p.velocity.resize(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const double vmax =
        cfg.v_max_per_dim.size() == dims ? cfg.v_max_per_dim[d] : cfg.v_max;
    p.velocity[d] = rng.uniform(-vmax, vmax);
  }
  p.pbest_position = p.position;
  return p;
}

inline double scalar_objective(const ObjectiveVector& ov, int k) {
  return k == 0 ? ov.coverage_ratio : ov.lowest_rtsn;
}

}  // namespace detail

// Runs the configured deployment search against one scenario/detector and
// returns the final archive, optional snapshots, and the reportable
// solution set. Deterministic for a given (config, scenario) pair.
inline RunOutput run(const OptimizerConfig& cfg, const Scenario& scenario,
                     const DetectorConfig& detector) {
  validate_optimizer_config(cfg);
  validate_scenario(scenario);
  if (!cfg.v_max_per_dim.empty() &&
      cfg.v_max_per_dim.size() !=
          3 * static_cast<std::size_t>(scenario.num_nodes))
    throw ConfigError("optimizer.v_max_per_dim",
                      "must have exactly 3 * num_nodes entries");

  const int j = scenario.num_nodes;
  const std::vector<Point> cells = grid_cells(scenario);
  const RcsTable rcs = make_rcs_table(scenario);
  const Region& placement = scenario.placement;

  Rng init_rng(derive_seed(cfg.seed, Stream::init));
  Rng dyn_rng(derive_seed(cfg.seed, Stream::dynamics));
  Rng leader_rng(derive_seed(cfg.seed, Stream::leader));

  auto eval = [&](const std::vector<double>& position) {
    return evaluate(unflatten(position, j), scenario, rcs, detector, cells);
  };

  RunOutput out;
  out.archive = Archive(cfg.archive_capacity);

  auto snapshot = [&](int iteration) {
    if (cfg.snapshot_every <= 0) return;
    ArchiveSnapshot snap;
    snap.iteration = iteration;
    snap.objectives.reserve(out.archive.size());
    for (const ArchiveEntry& e : out.archive.entries())
      snap.objectives.push_back(e.objectives);
    out.snapshots.push_back(std::move(snap));
  };

  auto sort_solutions = [&] {
    std::sort(out.solutions.begin(), out.solutions.end(),
              [](const auto& a, const auto& b) {
                if (a.second.coverage_ratio != b.second.coverage_ratio)
                  return a.second.coverage_ratio < b.second.coverage_ratio;
                return a.second.lowest_rtsn < b.second.lowest_rtsn;
              });
  };

  if (cfg.algorithm == Algorithm::random_deployment) {
    for (int i = 0; i < cfg.random_count; ++i) {
      std::vector<double> pos = detail::random_position(init_rng, placement, j);
      DeploymentVector dv = unflatten(pos, j);
      ObjectiveVector ov = eval(pos);
      out.solutions.emplace_back(std::move(dv), ov);
    }
    sort_solutions();
    archive_update(out.archive, out.solutions);
    snapshot(0);
    return out;
  }

  std::vector<std::pair<DeploymentVector, ObjectiveVector>> batch;
  auto evaluate_into_batch = [&](Particle& p) {
    const ObjectiveVector ov = eval(p.position);
    batch.emplace_back(unflatten(p.position, j), ov);
    return ov;
  };

  auto publish = [&] {
    for (const ArchiveEntry& e : out.archive.entries())
      out.solutions.emplace_back(e.dv, e.objectives);
    sort_solutions();
  };

  if (cfg.algorithm == Algorithm::mopso_cd) {
    std::vector<Particle> swarm;
    swarm.reserve(static_cast<std::size_t>(cfg.swarm_size));
    for (int s = 0; s < cfg.swarm_size; ++s)
      swarm.push_back(detail::init_particle(init_rng, cfg, placement, j));
    batch.clear();
    for (Particle& p : swarm) p.pbest_objectives = evaluate_into_batch(p);
    archive_update(out.archive, batch);
    snapshot(0);

    for (int t = 1; t <= cfg.t_max; ++t) {
      batch.clear();
      for (Particle& p : swarm) {
        // each particle draws its own leader from the iteration-start archive
        const std::size_t leader = select_leader_cd(out.archive, leader_rng);
        const std::vector<double> gbest = flatten(out.archive[leader].dv);
        update_particle(p, gbest, t, cfg, placement, j, dyn_rng);
        update_pbest(p, evaluate_into_batch(p));
      }
      archive_update(out.archive, batch);
      if (cfg.snapshot_every > 0 &&
          (t % cfg.snapshot_every == 0 || t == cfg.t_max))
        snapshot(t);
    }
    publish();
    return out;
  }

  // mopso_nrcd: a grouped multi-objective swarm chasing up to y_max leaders,
  // plus one single-objective helper swarm per objective feeding the same
  // archive.
  std::vector<Particle> main_swarm;
  main_swarm.reserve(static_cast<std::size_t>(cfg.main_swarm_size));
  for (int s = 0; s < cfg.main_swarm_size; ++s)
    main_swarm.push_back(detail::init_particle(init_rng, cfg, placement, j));
  std::array<std::vector<Particle>, 2> sub_swarms;
  for (int k = 0; k < 2; ++k) {
    sub_swarms[static_cast<std::size_t>(k)].reserve(
        static_cast<std::size_t>(cfg.sub_swarm_size));
    for (int s = 0; s < cfg.sub_swarm_size; ++s)
      sub_swarms[static_cast<std::size_t>(k)].push_back(
          detail::init_particle(init_rng, cfg, placement, j));
  }

  std::array<std::vector<double>, 2> sub_gbest_pos;
  std::array<double, 2> sub_gbest_val{};
  batch.clear();
  for (Particle& p : main_swarm) p.pbest_objectives = evaluate_into_batch(p);
  for (int k = 0; k < 2; ++k) {
    auto& swarm = sub_swarms[static_cast<std::size_t>(k)];
    bool first = true;
    for (Particle& p : swarm) {
      const ObjectiveVector ov = evaluate_into_batch(p);
      p.pbest_objectives = ov;
      const double v = detail::scalar_objective(ov, k);
      if (first || v > sub_gbest_val[static_cast<std::size_t>(k)]) {
        sub_gbest_val[static_cast<std::size_t>(k)] = v;
        sub_gbest_pos[static_cast<std::size_t>(k)] = p.position;
        first = false;
      }
    }
  }
  archive_update(out.archive, batch);
  snapshot(0);

  for (int t = 1; t <= cfg.t_max; ++t) {
    const SelectionResult sel =
        select_leaders_nrcd(out.archive, cfg.main_swarm_size, cfg.y_max);
    std::vector<std::vector<double>> leader_pos;
    leader_pos.reserve(sel.leaders.size());
    for (std::size_t idx : sel.leaders)
      leader_pos.push_back(flatten(out.archive[idx].dv));

    batch.clear();
    // groups take contiguous index blocks in leader order
    std::size_t s = 0;
    for (std::size_t g = 0; g < sel.leaders.size(); ++g) {
      for (int c = 0; c < sel.group_sizes[g]; ++c, ++s) {
        Particle& p = main_swarm[s];
        update_particle(p, leader_pos[g], t, cfg, placement, j, dyn_rng);
        update_pbest(p, evaluate_into_batch(p));
      }
    }
    for (int k = 0; k < 2; ++k) {
      auto& swarm = sub_swarms[static_cast<std::size_t>(k)];
      for (Particle& p : swarm) {
        update_particle(p, sub_gbest_pos[static_cast<std::size_t>(k)], t, cfg,
                        placement, j, dyn_rng);
        const ObjectiveVector ov = evaluate_into_batch(p);
        const double v = detail::scalar_objective(ov, k);
        if (v > detail::scalar_objective(p.pbest_objectives, k)) {
          p.pbest_position = p.position;
          p.pbest_objectives = ov;
        }
        if (v > sub_gbest_val[static_cast<std::size_t>(k)]) {
          sub_gbest_val[static_cast<std::size_t>(k)] = v;
          sub_gbest_pos[static_cast<std::size_t>(k)] = p.position;
        }
      }
    }
    archive_update(out.archive, batch);
    if (cfg.snapshot_every > 0 &&
        (t % cfg.snapshot_every == 0 || t == cfg.t_max))
      snapshot(t);
  }
  publish();
  return out;
}

}  // namespace msrs
