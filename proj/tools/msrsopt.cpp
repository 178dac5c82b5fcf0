// msrsopt: multistatic radar deployment optimizer.
//
// Subcommands:
//   optimize  run a deployment search experiment to a result directory
//   evaluate  score one explicit deployment under a scenario
//   compare   contrast two result directories
//
// Exit codes: 0 success, 2 invalid configuration or arguments, 3 I/O error.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msrs/experiment.hpp"

namespace {

msrs::ExperimentConfig load_config_file(const std::string& path) {
  if (path.empty()) return msrs::ExperimentConfig{};
  return msrs::parse_config(msrs::detail::read_file(path));
}

int run_optimize(const std::string& config_path,
                 const std::optional<std::uint64_t>& seed,
                 const std::string& algorithm, const std::string& mode,
                 const std::string& out_dir,
                 const std::optional<int>& snapshot_every) {
  msrs::ExperimentConfig cfg = load_config_file(config_path);
  if (seed) cfg.seed = *seed;
  if (!algorithm.empty())
    cfg.algorithm = msrs::parse_algorithm("--algorithm", algorithm);
  if (!mode.empty()) cfg.mode = msrs::parse_mode("--mode", mode);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (snapshot_every) cfg.snapshot_every = *snapshot_every;
  msrs::validate_config(cfg);

  const msrs::ExperimentResult result = msrs::run_experiment(cfg);
  for (const msrs::RunResult& rr : result.runs)
    std::printf("run %d (seed %llu): %zu solutions -> %s  [%.2f s]\n",
                rr.run_id, static_cast<unsigned long long>(rr.seed),
                rr.front_size, rr.front_file.string().c_str(),
                rr.wall_seconds);
  std::printf("manifest: %s\nmetrics:  %s\n",
              result.manifest_file.string().c_str(),
              result.metrics_file.string().c_str());
  return 0;
}

int run_evaluate(const std::string& config_path, const std::string& mode,
                 const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::vector<double>& rhos) {
  msrs::ExperimentConfig cfg = load_config_file(config_path);
  if (!mode.empty()) cfg.mode = msrs::parse_mode("--mode", mode);
  msrs::resolve_config(cfg);
  msrs::validate_config(cfg);
  const msrs::Scenario sc = msrs::make_scenario(cfg);
  if (xs.size() != ys.size())
    throw msrs::ConfigError("--x/--y", "need the same number of coordinates");
  msrs::DeploymentVector dv;
  for (std::size_t i = 0; i < xs.size(); ++i)
    dv.positions.push_back({xs[i], ys[i]});
  dv.power_ratios = rhos.empty()
                        ? std::vector<double>(xs.size(), 1.0)
                        : rhos;
  msrs::validate_deployment(dv, sc);
  const msrs::DetectorConfig det = msrs::make_detector(
      cfg.mode, cfg.num_nodes, cfg.p_fa, cfg.pfa_convention);
  const msrs::RcsTable rcs = msrs::make_rcs_table(sc);
  const msrs::ObjectiveVector ov = msrs::evaluate(dv, sc, rcs, det);
  std::printf("cr = %.12g\nlr_db = %.12g\n", ov.coverage_ratio,
              msrs::linear_to_db(ov.lowest_rtsn));
  return 0;
}

int run_compare(const std::string& a_dir, const std::string& b_dir,
                double ref_cr, double ref_lr_db, const std::string& out_path) {
  const msrs::ReferencePoint ref{ref_cr, ref_lr_db};
  const msrs::CompareReport rep = msrs::compare(a_dir, b_dir, ref);
  const std::string text = rep.serialize();
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    msrs::detail::write_file(out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multistatic radar deployment optimizer"};
  app.require_subcommand(1);

  std::string config_path, algorithm, mode, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> snapshot_every;

  CLI::App* optimize =
      app.add_subcommand("optimize", "Run a deployment search experiment");
  optimize->add_option("--config", config_path, "configuration file");
  optimize->add_option("--seed", seed, "master seed override");
  optimize->add_option("--algorithm", algorithm,
                       "cd | nrcd | random (overrides the config)");
  optimize->add_option("--mode", mode, "coop | noncoop (overrides the config)");
  optimize->add_option("--out", out_dir, "result directory override");
  optimize->add_option("--snapshot-every", snapshot_every,
                       "archive snapshot cadence, 0 disables");

  std::vector<double> xs, ys, rhos;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score one explicit deployment");
  evaluate->add_option("--config", config_path, "configuration file");
  evaluate->add_option("--mode", mode, "coop | noncoop (overrides the config)");
  evaluate->add_option("--x", xs, "node x coordinates (km)")->expected(-1);
  evaluate->add_option("--y", ys, "node y coordinates (km)")->expected(-1);
  evaluate->add_option("--rho", rhos, "per-node power ratios (default: all 1)")
      ->expected(-1);

  std::string a_dir, b_dir, report_path;
  double ref_cr = 0.15, ref_lr_db = -15.0;
  CLI::App* compare =
      app.add_subcommand("compare", "Contrast two result directories");
  compare->add_option("--a", a_dir, "baseline result directory")->required();
  compare->add_option("--b", b_dir, "improved result directory")->required();
  compare->add_option("--ref-cr", ref_cr, "reference coverage ratio");
  compare->add_option("--ref-lr-db", ref_lr_db, "reference lowest RTSN (dB)");
  compare->add_option("--out", report_path, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (optimize->parsed())
      return run_optimize(config_path, seed, algorithm, mode, out_dir,
                          snapshot_every);
    if (evaluate->parsed())
      return run_evaluate(config_path, mode, xs, ys, rhos);
    return run_compare(a_dir, b_dir, ref_cr, ref_lr_db, report_path);
  } catch (const msrs::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const msrs::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
