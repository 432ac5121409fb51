// The verification experiments.  Each takes a parsed config, runs the
// simulation, writes CSV tables plus summary.json under
// <output>/<experiment>/, and returns the report with its verdict rows.

#pragma once

#include "prlmc/harness/config.hpp"
#include "prlmc/harness/report.hpp"

namespace prlmc {
namespace harness {

ExperimentReport cmd_run(const ExperimentConfig& config);
ExperimentReport cmd_bias_sweep(const ExperimentConfig& config);
ExperimentReport cmd_drift_check(const ExperimentConfig& config);
ExperimentReport cmd_coupling_check(const ExperimentConfig& config);
ExperimentReport cmd_tv_decay(const ExperimentConfig& config);
ExperimentReport cmd_decreasing_step(const ExperimentConfig& config);
ExperimentReport cmd_midpoint_law(const ExperimentConfig& config);
ExperimentReport cmd_strong_error(const ExperimentConfig& config);

/// Dispatch on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace harness
}  // namespace prlmc
