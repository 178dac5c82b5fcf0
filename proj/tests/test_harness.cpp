// Experiment harness: config parsing/serialization, result-file formats,
// experiment directory layout, reloading, and result-set comparison.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "msrs/experiment.hpp"

using namespace msrs;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Small coherent configuration: 4x4 km, 16 unit cells, two nodes, a few
// iterations. Everything else rides on defaults.
std::string tiny_config_text(const std::string& algorithm,
                             const std::string& out_dir,
                             std::uint64_t seed = 3) {
  return "schema_version = 1\n"
         "scenario.region_width_km = 4\n"
         "scenario.region_height_km = 4\n"
         "scenario.cell_area_km2 = 1\n"
         "scenario.num_nodes = 2\n"
         "scenario.mode = noncoop\n"
         "scenario.r_max_km = 2\n"
         "optimizer.algorithm = " +
         algorithm +
         "\n"
         "optimizer.swarm_size = 8\n"
         "optimizer.main_swarm_size = 8\n"
         "optimizer.sub_swarm_size = 4\n"
         "optimizer.t_max = 2\n"
         "run.seed = " +
         std::to_string(seed) +
         "\n"
         "run.repetitions = 2\n"
         "run.snapshot_every = 1\n"
         "run.out_dir = " +
         out_dir + "\n";
}

std::filesystem::path fresh_dir(const std::string& name) {
  const std::filesystem::path p =
      std::filesystem::temp_directory_path() / "msrs_harness_tests" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  return detail::read_file(p);
}

void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

// Front rows for handcrafted result directories: both nodes at fixed spots,
// even power split, chosen objective values.
std::string handmade_front(
    const std::vector<std::pair<double, double>>& cr_lrdb, Algorithm alg) {
  std::vector<std::pair<DeploymentVector, ObjectiveVector>> solutions;
  for (const auto& [cr, lr_db] : cr_lrdb) {
    DeploymentVector dv;
    dv.positions = {{1.0, 1.0}, {3.0, 3.0}};
    dv.power_ratios = {1.0, 1.0};
    ObjectiveVector ov;
    ov.coverage_ratio = cr;
    ov.lowest_rtsn = db_to_linear(lr_db);
    solutions.emplace_back(std::move(dv), ov);
  }
  return front_csv(solutions, 0, alg, Mode::non_cooperative, 2);
}

// A manifest with repetitions = 1 for handcrafted directories.
std::string handmade_manifest(const std::string& algorithm,
                              const std::string& extra = "") {
  std::string text = tiny_config_text(algorithm, "unused");
  text.replace(text.find("run.repetitions = 2"),
               std::string("run.repetitions = 2").size(),
               "run.repetitions = 1");
  text += extra;
  return serialize_config(parse_config(text));
}

}  // namespace

TEST_CASE("configs round-trip byte for byte") {
  const ExperimentConfig cfg = parse_config(tiny_config_text("nrcd", "out"));
  const std::string canon = serialize_config(cfg);
  const ExperimentConfig back = parse_config(canon);
  CHECK(serialize_config(back) == canon);

  // resolving fills the cross-section seed; the result still round-trips
  ExperimentConfig resolved = cfg;
  resolve_config(resolved);
  REQUIRE(resolved.rcs_seed.has_value());
  const std::string canon2 = serialize_config(resolved);
  CHECK(canon2.find("scenario.rcs_seed = ") != std::string::npos);
  CHECK(serialize_config(parse_config(canon2)) == canon2);

  // defaults round-trip too
  const std::string defaults = serialize_config(ExperimentConfig{});
  CHECK(serialize_config(parse_config(defaults)) == defaults);
}

TEST_CASE("doubles survive serialization exactly") {
  ExperimentConfig cfg = parse_config(tiny_config_text("nrcd", "out"));
  cfg.cell_area_km2 = 1.0000000000000002;  // one ulp above 1
  cfg.p_fa = 1e-6;
  cfg.w_start = 0.9;
  cfg.c1 = 1.4999999999999998;
  const ExperimentConfig back = parse_config(serialize_config(cfg));
  CHECK(back.cell_area_km2 == cfg.cell_area_km2);
  CHECK(back.p_fa == cfg.p_fa);
  CHECK(back.w_start == cfg.w_start);
  CHECK(back.c1 == cfg.c1);
}

TEST_CASE("unknown and duplicate keys are rejected") {
  CHECK_THROWS_WITH(
      parse_config(tiny_config_text("nrcd", "out") + "bogus.key = 3\n"),
      Catch::Matchers::ContainsSubstring("bogus.key"));
  CHECK_THROWS_WITH(
      parse_config(tiny_config_text("nrcd", "out") + "run.seed = 4\n"),
      Catch::Matchers::ContainsSubstring("duplicate"));
  CHECK_THROWS_WITH(parse_config("not a key value line\n"),
                    Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_WITH(parse_config(" = 5\n"),
                    Catch::Matchers::ContainsSubstring("empty key"));
  CHECK_THROWS_WITH(parse_config("schema_version = 2\n"),
                    Catch::Matchers::ContainsSubstring("schema"));
}

TEST_CASE("errors name the offending field") {
  auto bad = [](const std::string& line, const std::string& needle) {
    std::string text = tiny_config_text("nrcd", "out");
    text += line + "\n";
    CHECK_THROWS_WITH(parse_config(text),
                      Catch::Matchers::ContainsSubstring(needle));
  };
  bad("scenario.num_nodes = 0", "scenario.num_nodes");
  bad("scenario.p_fa = 2", "scenario.p_fa");
  bad("scenario.p_dt = 1", "scenario.p_dt");
  bad("optimizer.t_max = -1", "optimizer.t_max");
  bad("run.repetitions = 0", "run.repetitions");
  bad("scenario.sigma = abc", "scenario.sigma");
  bad("optimizer.y_max = x", "optimizer.y_max");
}

TEST_CASE("enum spellings accept the short aliases") {
  ExperimentConfig cfg =
      parse_config(tiny_config_text("nrcd", "out") + "scenario.rcs_model = rayleigh\n");
  CHECK(cfg.mode == Mode::non_cooperative);  // written as noncoop
  CHECK(cfg.rcs_model == RcsModel::rayleigh);
  CHECK(cfg.algorithm == Algorithm::mopso_nrcd);

  cfg = parse_config(
      "scenario.mode = coop\n"
      "optimizer.algorithm = random\n"
      "detector.pfa_convention = standard\n");
  CHECK(cfg.mode == Mode::cooperative);
  CHECK(cfg.algorithm == Algorithm::random_deployment);
  CHECK(cfg.pfa_convention == PfaConvention::standard);

  // canonical long names come back out
  const std::string canon = serialize_config(cfg);
  CHECK(canon.find("scenario.mode = cooperative\n") != std::string::npos);
  CHECK(canon.find("optimizer.algorithm = random\n") != std::string::npos);

  CHECK_THROWS_AS(parse_config("scenario.mode = both\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("optimizer.algorithm = pso\n"), ConfigError);
}

TEST_CASE("comments, spacing, and line endings are tolerated") {
  const ExperimentConfig cfg = parse_config(
      "# leading comment\r\n"
      "\r\n"
      "  run.seed =  9   # trailing words\n"
      "\trun.repetitions\t=\t2\n"
      "# only comments after here\n");
  CHECK(cfg.seed == 9);
  CHECK(cfg.repetitions == 2);
}

TEST_CASE("the scenario fingerprint tracks only the physical setup") {
  ExperimentConfig a = parse_config(tiny_config_text("nrcd", "a", 1));
  ExperimentConfig b = parse_config(tiny_config_text("cd", "b", 2));
  resolve_config(a);
  resolve_config(b);
  // different algorithm, seed, out_dir, and (derived) cross-section seed:
  // the deterministic-cross-section fingerprint ignores all of them
  CHECK(scenario_fingerprint(a) == scenario_fingerprint(b));
  CHECK(scenario_fingerprint(a).find("scenario.rcs_seed") == std::string::npos);
  CHECK(scenario_fingerprint(a).find("optimizer.") == std::string::npos);
  CHECK(scenario_fingerprint(a).find("run.") == std::string::npos);

  // sampled cross-sections make the seed part of the physical setup
  a.rcs_model = RcsModel::rayleigh;
  b.rcs_model = RcsModel::rayleigh;
  CHECK(scenario_fingerprint(a).find("scenario.rcs_seed") != std::string::npos);
  CHECK(scenario_fingerprint(a) != scenario_fingerprint(b));

  // physical changes show up either way
  b.rcs_model = a.rcs_model = RcsModel::deterministic;
  b.r_max_km = 3.0;
  CHECK(scenario_fingerprint(a) != scenario_fingerprint(b));
}

TEST_CASE("front csv headers and rows follow the node count") {
  CHECK(front_csv_header(2) ==
        "run_id,algorithm,mode,J,solution_id,cr,lr_db,x_1,x_2,y_1,y_2,rho_1,"
        "rho_2");

  std::vector<std::pair<DeploymentVector, ObjectiveVector>> solutions;
  DeploymentVector dv;
  dv.positions = {{1.5, 2.0}};
  dv.power_ratios = {1.0};
  ObjectiveVector ov;
  ov.coverage_ratio = 0.25;
  ov.lowest_rtsn = 10.0;  // exactly 10 dB
  solutions.emplace_back(dv, ov);
  CHECK(front_csv(solutions, 0, Algorithm::mopso_cd, Mode::non_cooperative,
                  1) ==
        "run_id,algorithm,mode,J,solution_id,cr,lr_db,x_1,y_1,rho_1\n"
        "0,cd,non_cooperative,1,0,0.25,10,1.5,2,1\n");
}

TEST_CASE("snapshot files list the archive per recorded iteration") {
  std::vector<ArchiveSnapshot> snaps(2);
  snaps[0].iteration = 0;
  snaps[0].objectives = {{0.25, 10.0}, {0.5, 1.0}};
  snaps[1].iteration = 2;
  snaps[1].objectives = {{0.75, 0.1}};
  CHECK(snapshot_csv(snaps) ==
        "iteration,solution_id,cr,lr_db\n"
        "0,0,0.25,10\n"
        "0,1,0.5,0\n"
        "2,0,0.75,-10\n");
}

TEST_CASE("front files reload through validation") {
  const ExperimentConfig cfg = parse_config(tiny_config_text("nrcd", "out"));
  const Scenario sc = make_scenario(cfg);

  const std::string text =
      handmade_front({{0.25, -5.0}, {0.5, -8.0}}, Algorithm::mopso_nrcd);
  const std::vector<FrontRow> rows = parse_front_csv(text, sc);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].coverage_ratio == 0.25);
  CHECK(rel_err(rows[0].lowest_rtsn_db, -5.0) < 1e-11);
  CHECK(rows[1].coverage_ratio == 0.5);
  CHECK(rows[0].solution_id == 0);
  CHECK(rows[1].solution_id == 1);
  CHECK(rows[0].algorithm == Algorithm::mopso_nrcd);
  CHECK(rows[0].mode == Mode::non_cooperative);
  CHECK(rows[0].dv.positions[0].x == 1.0);
  CHECK(rows[0].dv.power_ratios[1] == 1.0);
}

TEST_CASE("front files reject structural damage") {
  const ExperimentConfig cfg = parse_config(tiny_config_text("nrcd", "out"));
  const Scenario sc = make_scenario(cfg);
  const std::string good =
      handmade_front({{0.25, -5.0}}, Algorithm::mopso_nrcd);

  CHECK_THROWS_AS(parse_front_csv("", sc), IoError);

  // header built for a different node count
  std::string bad = good;
  bad.replace(bad.find("x_1"), 3, "x_9");
  CHECK_THROWS_AS(parse_front_csv(bad, sc), IoError);

  // truncated row
  bad = good;
  bad.resize(bad.rfind(','));
  CHECK_THROWS_AS(parse_front_csv(bad, sc), IoError);

  // J column disagrees with the scenario
  bad = good;
  bad.replace(bad.find("\n0,nrcd,non_cooperative,2") + 24, 1, "3");
  CHECK_THROWS_AS(parse_front_csv(bad, sc), IoError);

  // coverage over 1
  CHECK_THROWS_AS(
      parse_front_csv(handmade_front({{1.25, -5.0}}, Algorithm::mopso_nrcd),
                      sc),
      IoError);

  // coverage that is not a multiple of one cell (16 cells here)
  CHECK_THROWS_AS(
      parse_front_csv(handmade_front({{0.3, -5.0}}, Algorithm::mopso_nrcd),
                      sc),
      IoError);

  // non-finite rtsn
  bad = good;
  bad.replace(bad.find(",-5"), 3, ",inf");
  CHECK_THROWS_AS(parse_front_csv(bad, sc), IoError);

  // a broken power budget fails deployment validation (rho_1 becomes 9)
  bad = good;
  bad.replace(bad.find(",1,1\n"), 5, ",9,1\n");
  CHECK_THROWS_AS(parse_front_csv(bad, sc), ConfigError);

  // a node outside the placement region fails too (x_1 becomes 9)
  bad = good;
  bad.replace(bad.find(",-5,1,"), 6, ",-5,9,");
  CHECK_THROWS_AS(parse_front_csv(bad, sc), ConfigError);
}

TEST_CASE("experiments write the documented file set deterministically") {
  const std::filesystem::path base = fresh_dir("exp");
  const std::string out_a = (base / "a").string();
  const std::string out_b = (base / "b").string();

  const ExperimentConfig cfg = parse_config(tiny_config_text("nrcd", out_a));
  const ExperimentResult res = run_experiment(cfg);

  REQUIRE(res.runs.size() == 2);
  CHECK(res.runs[0].run_id == 0);
  CHECK(res.runs[1].run_id == 1);
  CHECK(res.runs[0].seed == 3);  // run.seed + repetition index
  CHECK(res.runs[1].seed == 4);
  CHECK(res.runs[0].front_size > 0);

  for (const char* name :
       {"manifest.txt", "front_run0.csv", "front_run1.csv",
        "snapshots_run0.csv", "snapshots_run1.csv", "metrics.txt"})
    CHECK(std::filesystem::exists(base / "a" / name));

  const std::string metrics = slurp(res.metrics_file);
  CHECK(metrics.find("runs = 2\n") != std::string::npos);
  CHECK(metrics.find("run_0.front_size = ") != std::string::npos);
  CHECK(metrics.find("run_1.dominated_space = ") != std::string::npos);
  CHECK(metrics.find("mean.dominated_space = ") != std::string::npos);
  CHECK(metrics.find("reference.coverage_ratio = 0.15\n") != std::string::npos);
  CHECK(metrics.find("reference.lowest_rtsn_db = -15\n") != std::string::npos);

  // the manifest is itself a runnable config that reproduces the run
  const LoadedResult loaded = load_result(base / "a");
  REQUIRE(loaded.runs.size() == 2);
  CHECK(!loaded.runs[0].empty());
  CHECK(loaded.config.rcs_seed.has_value());

  // identical configuration, different directory: identical result bytes
  ExperimentConfig cfg_b = cfg;
  cfg_b.out_dir = out_b;
  run_experiment(cfg_b);
  CHECK(slurp(base / "a" / "front_run0.csv") ==
        slurp(base / "b" / "front_run0.csv"));
  CHECK(slurp(base / "a" / "front_run1.csv") ==
        slurp(base / "b" / "front_run1.csv"));
  CHECK(slurp(base / "a" / "metrics.txt") == slurp(base / "b" / "metrics.txt"));
}

TEST_CASE("comparing a result set against itself is neutral") {
  const std::filesystem::path base = fresh_dir("selfcmp");
  ExperimentConfig cfg =
      parse_config(tiny_config_text("nrcd", (base / "a").string()));
  run_experiment(cfg);

  const CompareReport rep = compare(base / "a", base / "a");
  CHECK_FALSE(rep.improvement_cr.average.has_value());
  CHECK_FALSE(rep.improvement_lr_db.average.has_value());
  CHECK(rep.improvement_cr.used == 0);
  CHECK(rep.a_points == rep.b_points);
  CHECK(rep.a_mean_dominated_space == rep.b_mean_dominated_space);
  REQUIRE(rep.a_dominated_space.size() == 2);
  CHECK(rep.a_dominated_space == rep.b_dominated_space);

  const std::string report = rep.serialize();
  CHECK(report.find("improvement.coverage_ratio.mean = undefined\n") !=
        std::string::npos);
  CHECK(report.find("dominated_space.ratio = 1\n") != std::string::npos);
}

TEST_CASE("a dominating result set scores the full fraction") {
  const std::filesystem::path base = fresh_dir("dom");
  std::filesystem::create_directories(base / "a");
  std::filesystem::create_directories(base / "b");

  spit(base / "a" / "manifest.txt", handmade_manifest("cd"));
  spit(base / "a" / "front_run0.csv",
       handmade_front({{0.25, -5.0}, {0.5, -8.0}}, Algorithm::mopso_cd));
  spit(base / "b" / "manifest.txt", handmade_manifest("nrcd"));
  spit(base / "b" / "front_run0.csv",
       handmade_front({{0.75, -2.0}}, Algorithm::mopso_nrcd));

  const CompareReport rep = compare(base / "a", base / "b");
  CHECK(rep.a_points == 2);
  CHECK(rep.b_points == 1);
  CHECK(rep.dominated_fraction_of_a == 1.0);

  // best gains: coverage max(0.75-0.25, 0.75-0.5) per point, mean of both
  REQUIRE(rep.improvement_cr.average.has_value());
  CHECK(rel_err(*rep.improvement_cr.average, 0.375) < 1e-9);
  REQUIRE(rep.improvement_lr_db.average.has_value());
  CHECK(rel_err(*rep.improvement_lr_db.average, 4.5) < 1e-9);
  CHECK(rep.improvement_cr.used == 2);
  CHECK(rep.improvement_cr.skipped == 0);

  CHECK(rep.b_mean_dominated_space > rep.a_mean_dominated_space);
  const std::string report = rep.serialize();
  CHECK(report.find("a.dominated_space.run_0 = ") != std::string::npos);
  CHECK(report.find("dominated_space.ratio = ") != std::string::npos);
}

TEST_CASE("mismatched scenarios refuse to compare") {
  const std::filesystem::path base = fresh_dir("mismatch");
  std::filesystem::create_directories(base / "a");
  std::filesystem::create_directories(base / "c");

  spit(base / "a" / "manifest.txt", handmade_manifest("cd"));
  spit(base / "a" / "front_run0.csv",
       handmade_front({{0.25, -5.0}}, Algorithm::mopso_cd));

  // same layout, different sensor reach
  std::string other = tiny_config_text("nrcd", "unused");
  other.replace(other.find("scenario.r_max_km = 2"),
                std::string("scenario.r_max_km = 2").size(),
                "scenario.r_max_km = 3");
  other.replace(other.find("run.repetitions = 2"),
                std::string("run.repetitions = 2").size(),
                "run.repetitions = 1");
  spit(base / "c" / "manifest.txt", serialize_config(parse_config(other)));
  spit(base / "c" / "front_run0.csv",
       handmade_front({{0.25, -5.0}}, Algorithm::mopso_nrcd));

  CHECK_THROWS_WITH(compare(base / "a", base / "c"),
                    Catch::Matchers::ContainsSubstring("r_max_km"));

  // deterministic cross-sections: different run seeds stay comparable
  std::string reseeded = tiny_config_text("nrcd", "unused", 77);
  reseeded.replace(reseeded.find("run.repetitions = 2"),
                   std::string("run.repetitions = 2").size(),
                   "run.repetitions = 1");
  std::filesystem::create_directories(base / "d");
  spit(base / "d" / "manifest.txt", serialize_config(parse_config(reseeded)));
  spit(base / "d" / "front_run0.csv",
       handmade_front({{0.5, -4.0}}, Algorithm::mopso_nrcd));
  CHECK_NOTHROW(compare(base / "a", base / "d"));
}
