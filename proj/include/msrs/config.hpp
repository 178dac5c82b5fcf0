#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "msrs/core.hpp"
#include "msrs/detection.hpp"
#include "msrs/optimizer.hpp"
#include "msrs/scenario.hpp"

namespace msrs {

// Flat experiment description, read and written as "key = value" lines.
// Defaults describe the reference setup: 50x50 km region, 2.5 km^2 cells,
// 5 nodes, cooperative detection, the grouped-swarm optimizer.
struct ExperimentConfig {
  // scenario
  double region_width_km = 50.0;
  double region_height_km = 50.0;
  double cell_area_km2 = 2.5;
  int num_nodes = 5;
  Mode mode = Mode::cooperative;
  double p_dt = 0.8;
  double p_fa = 1e-6;
  double d0_db = 12.5;
  double r_max_km = 6.0;
  double sigma = 1.0;
  RcsModel rcs_model = RcsModel::deterministic;
  std::optional<std::uint64_t> rcs_seed;  // resolved from run.seed when unset
  double min_range_km = 0.1;
  // detector
  PfaConvention pfa_convention = PfaConvention::paper_literal;
  // optimizer
  Algorithm algorithm = Algorithm::mopso_nrcd;
  int swarm_size = 200;
  int main_swarm_size = 100;
  int sub_swarm_size = 50;
  int t_max = 2000;
  double c1 = 2.0;
  double c2 = 2.0;
  double v_max = 4.0;
  double w_start = 0.9;
  double w_delta = 0.5;
  int y_max = 3;
  std::uint64_t archive_capacity = 0;
  int random_count = 50;
  // run
  std::uint64_t seed = 1;
  int repetitions = 1;
  int snapshot_every = 0;
  std::string out_dir = "out";
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end)
    throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
  return out;
}

inline long long parse_int(const std::string& key, std::string_view v) {
  long long out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end)
    throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end)
    throw ConfigError(key,
                      "expected an unsigned integer, got '" + std::string(v) + "'");
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace detail

inline std::string to_string(Mode m) {
  return m == Mode::cooperative ? "cooperative" : "non_cooperative";
}
inline std::string to_string(RcsModel m) {
  return m == RcsModel::deterministic ? "deterministic" : "rayleigh";
}
inline std::string to_string(PfaConvention c) {
  return c == PfaConvention::paper_literal ? "paper_literal" : "standard";
}
inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::mopso_cd: return "cd";
    case Algorithm::mopso_nrcd: return "nrcd";
    default: return "random";
  }
}

inline Mode parse_mode(const std::string& key, std::string_view v) {
  if (v == "cooperative" || v == "coop") return Mode::cooperative;
  if (v == "non_cooperative" || v == "noncoop") return Mode::non_cooperative;
  throw ConfigError(key, "expected cooperative or non_cooperative");
}
inline RcsModel parse_rcs_model(const std::string& key, std::string_view v) {
  if (v == "deterministic") return RcsModel::deterministic;
  if (v == "rayleigh") return RcsModel::rayleigh;
  throw ConfigError(key, "expected deterministic or rayleigh");
}
inline PfaConvention parse_pfa_convention(const std::string& key,
                                          std::string_view v) {
  if (v == "paper_literal") return PfaConvention::paper_literal;
  if (v == "standard") return PfaConvention::standard;
  throw ConfigError(key, "expected paper_literal or standard");
}
inline Algorithm parse_algorithm(const std::string& key, std::string_view v) {
  if (v == "cd") return Algorithm::mopso_cd;
  if (v == "nrcd") return Algorithm::mopso_nrcd;
  if (v == "random") return Algorithm::random_deployment;
  throw ConfigError(key, "expected cd, nrcd, or random");
}

inline Scenario make_scenario(const ExperimentConfig& cfg) {
  Scenario sc;
  sc.surveillance = {cfg.region_width_km, cfg.region_height_km, {0.0, 0.0}};
  sc.placement = sc.surveillance;
  sc.cell_area_km2 = cfg.cell_area_km2;
  sc.num_nodes = cfg.num_nodes;
  sc.mode = cfg.mode;
  sc.d0 = db_to_linear(cfg.d0_db);
  sc.r_max_km = cfg.r_max_km;
  sc.sigma = cfg.sigma;
  sc.p_dt = cfg.p_dt;
  sc.p_fa = cfg.p_fa;
  sc.rcs_model = cfg.rcs_model;
  sc.rcs_seed = cfg.rcs_seed.value_or(derive_seed(cfg.seed, Stream::rcs));
  sc.min_range_km = cfg.min_range_km;
  return sc;
}

inline OptimizerConfig make_optimizer_config(const ExperimentConfig& cfg,
                                             int repetition) {
  OptimizerConfig oc;
  oc.algorithm = cfg.algorithm;
  oc.swarm_size = cfg.swarm_size;
  oc.main_swarm_size = cfg.main_swarm_size;
  oc.sub_swarm_size = cfg.sub_swarm_size;
  oc.t_max = cfg.t_max;
  oc.c1 = cfg.c1;
  oc.c2 = cfg.c2;
  oc.v_max = cfg.v_max;
  oc.w_start = cfg.w_start;
  oc.w_delta = cfg.w_delta;
  oc.y_max = cfg.y_max;
  oc.archive_capacity = static_cast<std::size_t>(cfg.archive_capacity);
  oc.random_count = cfg.random_count;
  oc.snapshot_every = cfg.snapshot_every;
  oc.seed = cfg.seed + static_cast<std::uint64_t>(repetition);
  return oc;
}

inline void validate_config(const ExperimentConfig& cfg) {
  validate_scenario(make_scenario(cfg));
  validate_optimizer_config(make_optimizer_config(cfg, 0));
  grid_spec(make_scenario(cfg));
  if (!(cfg.p_dt > 0.0 && cfg.p_dt < 1.0))
    throw ConfigError("scenario.p_dt", "must lie in (0, 1)");
  if (cfg.repetitions < 1)
    throw ConfigError("run.repetitions", "must be >= 1");
  if (cfg.snapshot_every < 0)
    throw ConfigError("run.snapshot_every", "must be >= 0");
  if (cfg.out_dir.empty())
    throw ConfigError("run.out_dir", "must not be empty");
}

// Fills every value a run needs but the file may omit; today that is the
// cross-section seed, derived from the run seed so the sampled world is
// frozen for the whole experiment.
inline void resolve_config(ExperimentConfig& cfg) {
  if (!cfg.rcs_seed) cfg.rcs_seed = derive_seed(cfg.seed, Stream::rcs);
}

inline void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                              std::string_view value) {
  using detail::parse_double;
  using detail::parse_int;
  using detail::parse_u64;
  auto as_int = [&](long long lo, long long hi) {
    const long long v = parse_int(key, value);
    if (v < lo || v > hi) throw ConfigError(key, "out of range");
    return static_cast<int>(v);
  };
  if (key == "schema_version") {
    if (parse_int(key, value) != 1)
      throw ConfigError(key, "unsupported schema version");
  } else if (key == "scenario.region_width_km") {
    cfg.region_width_km = parse_double(key, value);
  } else if (key == "scenario.region_height_km") {
    cfg.region_height_km = parse_double(key, value);
  } else if (key == "scenario.cell_area_km2") {
    cfg.cell_area_km2 = parse_double(key, value);
  } else if (key == "scenario.num_nodes") {
    cfg.num_nodes = as_int(1, 1000);
  } else if (key == "scenario.mode") {
    cfg.mode = parse_mode(key, value);
  } else if (key == "scenario.p_dt") {
    cfg.p_dt = parse_double(key, value);
  } else if (key == "scenario.p_fa") {
    cfg.p_fa = parse_double(key, value);
  } else if (key == "scenario.d0_db") {
    cfg.d0_db = parse_double(key, value);
  } else if (key == "scenario.r_max_km") {
    cfg.r_max_km = parse_double(key, value);
  } else if (key == "scenario.sigma") {
    cfg.sigma = parse_double(key, value);
  } else if (key == "scenario.rcs_model") {
    cfg.rcs_model = parse_rcs_model(key, value);
  } else if (key == "scenario.rcs_seed") {
    cfg.rcs_seed = parse_u64(key, value);
  } else if (key == "scenario.min_range_km") {
    cfg.min_range_km = parse_double(key, value);
  } else if (key == "detector.pfa_convention") {
    cfg.pfa_convention = parse_pfa_convention(key, value);
  } else if (key == "optimizer.algorithm") {
    cfg.algorithm = parse_algorithm(key, value);
  } else if (key == "optimizer.swarm_size") {
    cfg.swarm_size = as_int(1, 1000000);
  } else if (key == "optimizer.main_swarm_size") {
    cfg.main_swarm_size = as_int(1, 1000000);
  } else if (key == "optimizer.sub_swarm_size") {
    cfg.sub_swarm_size = as_int(1, 1000000);
  } else if (key == "optimizer.t_max") {
    cfg.t_max = as_int(0, 100000000);
  } else if (key == "optimizer.c1") {
    cfg.c1 = parse_double(key, value);
  } else if (key == "optimizer.c2") {
    cfg.c2 = parse_double(key, value);
  } else if (key == "optimizer.v_max") {
    cfg.v_max = parse_double(key, value);
  } else if (key == "optimizer.w_start") {
    cfg.w_start = parse_double(key, value);
  } else if (key == "optimizer.w_delta") {
    cfg.w_delta = parse_double(key, value);
  } else if (key == "optimizer.y_max") {
    cfg.y_max = as_int(1, 1000000);
  } else if (key == "optimizer.archive_capacity") {
    cfg.archive_capacity = parse_u64(key, value);
  } else if (key == "optimizer.random_count") {
    cfg.random_count = as_int(1, 100000000);
  } else if (key == "run.seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "run.repetitions") {
    cfg.repetitions = as_int(1, 1000000);
  } else if (key == "run.snapshot_every") {
    cfg.snapshot_every = as_int(0, 100000000);
  } else if (key == "run.out_dir") {
    cfg.out_dir = std::string(value);
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

// Parses "key = value" lines. '#' starts a comment; blank lines are
// ignored; a repeated key is an error. Unrecognized keys are rejected so
// typos cannot silently fall back to defaults.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::size_t line_start = 0;
  int line_no = 0;
  while (line_start <= text.size()) {
    ++line_no;
    std::size_t eol = text.find('\n', line_start);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(line_start, eol - line_start);
    line_start = eol + 1;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no), "empty key");
    if (!seen.insert(key).second)
      throw ConfigError(key, "duplicate configuration key");
    apply_config_line(cfg, key, value);
  }
  validate_config(cfg);
  return cfg;
}

// Canonical echo of the resolved configuration; parsing it back reproduces
// the same configuration exactly (doubles render in shortest round-trip
// form).
inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::format_double;
  std::string s;
  auto line = [&s](const std::string& key, const std::string& value) {
    s += key;
    s += " = ";
    s += value;
    s += '\n';
  };
  line("schema_version", "1");
  line("scenario.region_width_km", format_double(cfg.region_width_km));
  line("scenario.region_height_km", format_double(cfg.region_height_km));
  line("scenario.cell_area_km2", format_double(cfg.cell_area_km2));
  line("scenario.num_nodes", std::to_string(cfg.num_nodes));
  line("scenario.mode", to_string(cfg.mode));
  line("scenario.p_dt", format_double(cfg.p_dt));
  line("scenario.p_fa", format_double(cfg.p_fa));
  line("scenario.d0_db", format_double(cfg.d0_db));
  line("scenario.r_max_km", format_double(cfg.r_max_km));
  line("scenario.sigma", format_double(cfg.sigma));
  line("scenario.rcs_model", to_string(cfg.rcs_model));
  if (cfg.rcs_seed) line("scenario.rcs_seed", std::to_string(*cfg.rcs_seed));
  line("scenario.min_range_km", format_double(cfg.min_range_km));
  line("detector.pfa_convention", to_string(cfg.pfa_convention));
  line("optimizer.algorithm", to_string(cfg.algorithm));
  line("optimizer.swarm_size", std::to_string(cfg.swarm_size));
  line("optimizer.main_swarm_size", std::to_string(cfg.main_swarm_size));
  line("optimizer.sub_swarm_size", std::to_string(cfg.sub_swarm_size));
  line("optimizer.t_max", std::to_string(cfg.t_max));
  line("optimizer.c1", format_double(cfg.c1));
  line("optimizer.c2", format_double(cfg.c2));
  line("optimizer.v_max", format_double(cfg.v_max));
  line("optimizer.w_start", format_double(cfg.w_start));
  line("optimizer.w_delta", format_double(cfg.w_delta));
  line("optimizer.y_max", std::to_string(cfg.y_max));
  line("optimizer.archive_capacity", std::to_string(cfg.archive_capacity));
  line("optimizer.random_count", std::to_string(cfg.random_count));
  line("run.seed", std::to_string(cfg.seed));
  line("run.repetitions", std::to_string(cfg.repetitions));
  line("run.snapshot_every", std::to_string(cfg.snapshot_every));
  line("run.out_dir", cfg.out_dir);
  return s;
}

// Scenario-defining subset of the configuration; two result sets are only
// comparable when these lines match byte for byte. The cross-section seed
// counts only when the table is actually sampled.
inline std::string scenario_fingerprint(const ExperimentConfig& cfg) {
  const std::string full = serialize_config(cfg);
  std::string out;
  std::size_t pos = 0;
  while (pos < full.size()) {
    std::size_t eol = full.find('\n', pos);
    if (eol == std::string::npos) eol = full.size();
    const std::string_view line(full.data() + pos, eol - pos);
    const bool skip_seed = cfg.rcs_model == RcsModel::deterministic &&
                           line.starts_with("scenario.rcs_seed");
    if (!skip_seed &&
        (line.starts_with("scenario.") || line.starts_with("detector."))) {
      out += line;
      out += '\n';
    }
    pos = eol + 1;
  }
  return out;
}

}  // namespace msrs
