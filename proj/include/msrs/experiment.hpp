#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msrs/config.hpp"
#include "msrs/metrics.hpp"

namespace msrs {

namespace detail {

// Result files carry 12 significant digits: enough that reloaded fronts
// re-validate, stable to format twice.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

inline std::string front_csv_header(int num_nodes) {
  std::string h = "run_id,algorithm,mode,J,solution_id,cr,lr_db";
  auto block = [&](const char* stem) {
    for (int i = 1; i <= num_nodes; ++i)
      h += "," + std::string(stem) + "_" + std::to_string(i);
  };
  block("x");
  block("y");
  block("rho");
  return h;
}

inline std::string front_csv(
    const std::vector<std::pair<DeploymentVector, ObjectiveVector>>& solutions,
    int run_id, Algorithm algorithm, Mode mode, int num_nodes) {
  std::string s = front_csv_header(num_nodes) + "\n";
  int solution_id = 0;
  for (const auto& [dv, ov] : solutions) {
    s += std::to_string(run_id);
    s += "," + to_string(algorithm);
    s += "," + to_string(mode);
    s += "," + std::to_string(num_nodes);
    s += "," + std::to_string(solution_id++);
    s += "," + detail::format_value(ov.coverage_ratio);
    s += "," + detail::format_value(linear_to_db(ov.lowest_rtsn));
    for (const Point& p : dv.positions) s += "," + detail::format_value(p.x);
    for (const Point& p : dv.positions) s += "," + detail::format_value(p.y);
    for (double rho : dv.power_ratios) s += "," + detail::format_value(rho);
    s += "\n";
  }
  return s;
}

inline std::string snapshot_csv(const std::vector<ArchiveSnapshot>& snapshots) {
  std::string s = "iteration,solution_id,cr,lr_db\n";
  for (const ArchiveSnapshot& snap : snapshots) {
    int solution_id = 0;
    for (const ObjectiveVector& ov : snap.objectives) {
      s += std::to_string(snap.iteration);
      s += "," + std::to_string(solution_id++);
      s += "," + detail::format_value(ov.coverage_ratio);
      s += "," + detail::format_value(linear_to_db(ov.lowest_rtsn));
      s += "\n";
    }
  }
  return s;
}

struct FrontRow {
  int run_id = 0;
  Algorithm algorithm = Algorithm::mopso_nrcd;
  Mode mode = Mode::cooperative;
  int solution_id = 0;
  double coverage_ratio = 0.0;
  double lowest_rtsn_db = 0.0;
  DeploymentVector dv;
};

// Parses one front file and re-validates every row against the scenario it
// was produced under.
inline std::vector<FrontRow> parse_front_csv(const std::string& text,
                                             const Scenario& sc) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("front file: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != front_csv_header(sc.num_nodes))
    throw IoError("front file: header does not match the scenario layout");
  const std::size_t j = static_cast<std::size_t>(sc.num_nodes);
  const long long cells = grid_spec(sc).cells;
  std::vector<FrontRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv_line(line);
    if (f.size() != 7 + 3 * j)
      throw IoError("front file: wrong column count on row " +
                    std::to_string(rows.size()));
    FrontRow row;
    row.run_id = static_cast<int>(detail::parse_int("front.run_id", f[0]));
    row.algorithm = parse_algorithm("front.algorithm", f[1]);
    row.mode = parse_mode("front.mode", f[2]);
    if (detail::parse_int("front.J", f[3]) != sc.num_nodes)
      throw IoError("front file: row J does not match the scenario");
    row.solution_id =
        static_cast<int>(detail::parse_int("front.solution_id", f[4]));
    row.coverage_ratio = detail::parse_double("front.cr", f[5]);
    row.lowest_rtsn_db = detail::parse_double("front.lr_db", f[6]);
    row.dv.positions.resize(j);
    row.dv.power_ratios.resize(j);
    for (std::size_t i = 0; i < j; ++i) {
      row.dv.positions[i].x = detail::parse_double("front.x", f[7 + i]);
      row.dv.positions[i].y = detail::parse_double("front.y", f[7 + j + i]);
      row.dv.power_ratios[i] =
          detail::parse_double("front.rho", f[7 + 2 * j + i]);
    }
    validate_deployment(row.dv, sc);
    if (!(row.coverage_ratio >= 0.0 && row.coverage_ratio <= 1.0))
      throw IoError("front file: coverage ratio out of [0, 1]");
    const double scaled = row.coverage_ratio * static_cast<double>(cells);
    if (std::abs(scaled - std::llround(scaled)) > 1e-6)
      throw IoError("front file: coverage ratio is not a cell count");
    if (!std::isfinite(row.lowest_rtsn_db))
      throw IoError("front file: lowest RTSN is not finite");
    rows.push_back(std::move(row));
  }
  return rows;
}

struct RunResult {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::size_t front_size = 0;
  double wall_seconds = 0.0;
  std::filesystem::path front_file;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::filesystem::path out_dir;
  std::filesystem::path manifest_file;
  std::filesystem::path metrics_file;
};

// Runs every repetition of the configured experiment and writes, under
// out_dir: manifest.txt (the resolved configuration, re-runnable as a
// config), front_run<r>.csv per repetition, snapshots_run<r>.csv when
// snapshots are enabled, and metrics.txt. File contents depend only on the
// configuration, never on wall time.
inline ExperimentResult run_experiment(ExperimentConfig cfg) {
  resolve_config(cfg);
  validate_config(cfg);
  const std::filesystem::path out_dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + out_dir.string() + ": " +
                  ec.message());

  ExperimentResult result;
  result.out_dir = out_dir;
  result.manifest_file = out_dir / "manifest.txt";
  detail::write_file(result.manifest_file, serialize_config(cfg));

  const Scenario sc = make_scenario(cfg);
  const DetectorConfig det =
      make_detector(cfg.mode, cfg.num_nodes, cfg.p_fa, cfg.pfa_convention);

  std::string metrics = "schema_version = 1\n";
  metrics += "runs = " + std::to_string(cfg.repetitions) + "\n";
  const ReferencePoint ref{};
  double ds_sum = 0.0;

  for (int r = 0; r < cfg.repetitions; ++r) {
    const OptimizerConfig oc = make_optimizer_config(cfg, r);
    const auto t0 = std::chrono::steady_clock::now();
    const RunOutput ro = run(oc, sc, det);
    const auto t1 = std::chrono::steady_clock::now();

    RunResult rr;
    rr.run_id = r;
    rr.seed = oc.seed;
    rr.front_size = ro.solutions.size();
    rr.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    rr.front_file = out_dir / ("front_run" + std::to_string(r) + ".csv");
    detail::write_file(
        rr.front_file,
        front_csv(ro.solutions, r, cfg.algorithm, cfg.mode, cfg.num_nodes));
    if (cfg.snapshot_every > 0)
      detail::write_file(
          out_dir / ("snapshots_run" + std::to_string(r) + ".csv"),
          snapshot_csv(ro.snapshots));

    std::vector<FrontPoint> pts;
    pts.reserve(ro.solutions.size());
    double best_cr = 0.0;
    double best_lr = -std::numeric_limits<double>::infinity();
    for (const auto& [dv, ov] : ro.solutions) {
      const double lr_db = linear_to_db(ov.lowest_rtsn);
      pts.push_back({ov.coverage_ratio, lr_db});
      best_cr = std::max(best_cr, ov.coverage_ratio);
      best_lr = std::max(best_lr, lr_db);
    }
    const double ds = dominated_space(pts, ref);
    ds_sum += ds;
    const std::string p = "run_" + std::to_string(r) + ".";
    metrics += p + "front_size = " + std::to_string(rr.front_size) + "\n";
    metrics += p + "best_coverage_ratio = " + detail::format_value(best_cr) + "\n";
    metrics += p + "best_lowest_rtsn_db = " + detail::format_value(best_lr) + "\n";
    metrics += p + "dominated_space = " + detail::format_value(ds) + "\n";
    result.runs.push_back(std::move(rr));
  }
  metrics += "mean.dominated_space = " +
             detail::format_value(ds_sum / cfg.repetitions) + "\n";
  metrics += "reference.coverage_ratio = " +
             detail::format_value(ref.coverage_ratio) + "\n";
  metrics += "reference.lowest_rtsn_db = " +
             detail::format_value(ref.lowest_rtsn_db) + "\n";
  result.metrics_file = out_dir / "metrics.txt";
  detail::write_file(result.metrics_file, metrics);
  return result;
}

struct LoadedResult {
  ExperimentConfig config;
  std::vector<std::vector<FrontRow>> runs;
};

inline LoadedResult load_result(const std::filesystem::path& dir) {
  LoadedResult out;
  out.config = parse_config(detail::read_file(dir / "manifest.txt"));
  const Scenario sc = make_scenario(out.config);
  for (int r = 0; r < out.config.repetitions; ++r) {
    const std::filesystem::path f =
        dir / ("front_run" + std::to_string(r) + ".csv");
    out.runs.push_back(parse_front_csv(detail::read_file(f), sc));
  }
  return out;
}

struct CompareReport {
  std::size_t a_points = 0;
  std::size_t b_points = 0;
  ImprovementResult improvement_cr;
  ImprovementResult improvement_lr_db;
  double dominated_fraction_of_a = 0.0;
  std::vector<double> a_dominated_space;  // per run
  std::vector<double> b_dominated_space;
  double a_mean_dominated_space = 0.0;
  double b_mean_dominated_space = 0.0;
  ReferencePoint reference;

  std::string serialize() const {
    std::string s = "schema_version = 1\n";
    auto line = [&s](const std::string& k, const std::string& v) {
      s += k + " = " + v + "\n";
    };
    line("reference.coverage_ratio",
         detail::format_value(reference.coverage_ratio));
    line("reference.lowest_rtsn_db",
         detail::format_value(reference.lowest_rtsn_db));
    line("a.points", std::to_string(a_points));
    line("b.points", std::to_string(b_points));
    auto imp = [&](const std::string& k, const ImprovementResult& r) {
      line("improvement." + k + ".mean",
           r.average ? detail::format_value(*r.average) : "undefined");
      line("improvement." + k + ".used", std::to_string(r.used));
      line("improvement." + k + ".skipped", std::to_string(r.skipped));
    };
    imp("coverage_ratio", improvement_cr);
    imp("lowest_rtsn_db", improvement_lr_db);
    line("dominated.fraction_of_a",
         detail::format_value(dominated_fraction_of_a));
    for (std::size_t r = 0; r < a_dominated_space.size(); ++r)
      line("a.dominated_space.run_" + std::to_string(r),
           detail::format_value(a_dominated_space[r]));
    line("a.dominated_space.mean",
         detail::format_value(a_mean_dominated_space));
    for (std::size_t r = 0; r < b_dominated_space.size(); ++r)
      line("b.dominated_space.run_" + std::to_string(r),
           detail::format_value(b_dominated_space[r]));
    line("b.dominated_space.mean",
         detail::format_value(b_mean_dominated_space));
    if (a_mean_dominated_space > 0.0)
      line("dominated_space.ratio",
           detail::format_value(b_mean_dominated_space /
                                a_mean_dominated_space));
    return s;
  }
};

namespace detail {

inline std::vector<FrontPoint> all_points(const LoadedResult& lr) {
  std::vector<FrontPoint> pts;
  for (const auto& run : lr.runs)
    for (const FrontRow& row : run)
      pts.push_back({row.coverage_ratio, row.lowest_rtsn_db});
  return pts;
}

inline std::vector<FrontPoint> nondominated(std::vector<FrontPoint> pts) {
  std::vector<FrontPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t k = 0; k < pts.size() && !dominated; ++k)
      if (k != i && dominates(pts[k], pts[i])) dominated = true;
    if (!dominated) out.push_back(pts[i]);
  }
  return out;
}

}  // namespace detail

// Compares result directory b against a (b in the improved role). The two
// manifests must describe the same scenario and detector; otherwise the
// comparison is refused with the first differing line in the message.
inline CompareReport compare(const std::filesystem::path& a_dir,
                             const std::filesystem::path& b_dir,
                             const ReferencePoint& ref = {}) {
  const LoadedResult a = load_result(a_dir);
  const LoadedResult b = load_result(b_dir);
  const std::string fa = scenario_fingerprint(a.config);
  const std::string fb = scenario_fingerprint(b.config);
  if (fa != fb) {
    std::istringstream sa(fa), sb(fb);
    std::string la, lb;
    while (std::getline(sa, la) && std::getline(sb, lb) && la == lb) {
    }
    throw ConfigError("compare",
                      "scenario fingerprints differ ('" + la + "' vs '" + lb +
                          "'); results are not comparable");
  }

  CompareReport rep;
  rep.reference = ref;
  const std::vector<FrontPoint> a_all = detail::all_points(a);
  const std::vector<FrontPoint> b_all = detail::all_points(b);
  rep.a_points = a_all.size();
  rep.b_points = b_all.size();
  const std::vector<FrontPoint> cgs = detail::nondominated(a_all);
  const std::vector<FrontPoint> igs = detail::nondominated(b_all);
  rep.improvement_cr =
      average_improvement(igs, cgs, FrontObjective::coverage_ratio);
  rep.improvement_lr_db =
      average_improvement(igs, cgs, FrontObjective::lowest_rtsn_db);

  std::size_t dominated_count = 0;
  for (const FrontPoint& p : a_all) {
    for (const FrontPoint& q : b_all) {
      if (dominates(q, p)) {
        ++dominated_count;
        break;
      }
    }
  }
  rep.dominated_fraction_of_a =
      a_all.empty() ? 0.0
                    : static_cast<double>(dominated_count) /
                          static_cast<double>(a_all.size());

  auto per_run_ds = [&](const LoadedResult& lr, std::vector<double>& out) {
    double sum = 0.0;
    for (const auto& run : lr.runs) {
      std::vector<FrontPoint> pts;
      pts.reserve(run.size());
      for (const FrontRow& row : run)
        pts.push_back({row.coverage_ratio, row.lowest_rtsn_db});
      out.push_back(dominated_space(pts, ref));
      sum += out.back();
    }
    return out.empty() ? 0.0 : sum / static_cast<double>(out.size());
  };
  rep.a_mean_dominated_space = per_run_ds(a, rep.a_dominated_space);
  rep.b_mean_dominated_space = per_run_ds(b, rep.b_dominated_space);
  return rep;
}

}  // namespace msrs
