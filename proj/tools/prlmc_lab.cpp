// prlmc-lab: run one verification experiment from a JSON config.
//
//   prlmc-lab <experiment> --config cfg.json [--seed N] [--out DIR] [--threads N]
//
// Exit codes: 0 all verdicts pass, 1 any verdict fails, 2 inconclusive,
// 3 configuration or validation error.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "prlmc/harness/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Langevin midpoint sampler verification lab"};
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int threads = 0;

  app.add_option("experiment", experiment,
                 "one of: run, bias-sweep, drift-check, coupling-check, tv-decay, "
                 "decreasing-step, midpoint-law, strong-error")
      ->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "override master_seed");
  app.add_option("--out", out_dir, "override output directory");
  app.add_option("--threads", threads, "worker thread count (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    prlmc::harness::ExperimentConfig config =
        prlmc::harness::ExperimentConfig::from_file(config_path);
    config.experiment = prlmc::harness::experiment_kind_from_string(experiment);
    if (seed >= 0) {
      config.master_seed = static_cast<std::uint64_t>(seed);
      config.sampler.rng = prlmc::RngPolicy{config.master_seed};
    }
    if (!out_dir.empty()) config.output = out_dir;
    if (threads > 0) config.threads = threads;
    // Environment override for the thread count only; science parameters all
    // live in the config file.
    if (const char* env = std::getenv("PRLMC_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) config.threads = n;
    }

    const prlmc::harness::ExperimentReport report = prlmc::harness::run_experiment(config);
    for (const auto& row : report.rows) {
      std::printf("[%s] %s", prlmc::harness::to_string(row.verdict).c_str(), row.id.c_str());
      if (!row.detail.empty()) std::printf(" (%s)", row.detail.c_str());
      std::printf("\n");
    }
    std::printf("overall: %s\n", prlmc::harness::to_string(report.overall()).c_str());
    return report.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
