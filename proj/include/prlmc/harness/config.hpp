// Experiment configuration: one JSON document describing the experiment
// kind, the sampler, the trial/step budget and the output location.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "prlmc/sampler.hpp"

namespace prlmc {
namespace harness {

enum class ExperimentKind {
  Run,
  BiasSweep,
  DriftCheck,
  CouplingCheck,
  TvDecay,
  DecreasingStep,
  MidpointLaw,
  StrongError,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Run;
  SamplerConfig sampler;
  std::int64_t trials = 1;
  std::int64_t steps = 0;
  std::vector<std::int64_t> checkpoints;
  std::vector<double> eta_grid;
  std::uint64_t master_seed = 0;
  std::string output = "out";
  int threads = 0;  // 0 = hardware concurrency

  // Experiment-specific knobs, all with defaults.
  std::vector<double> probe_radii{0.0, 0.5, 1.0, 2.0, 5.0, 20.0};  // drift-check
  std::vector<std::vector<double>> probe_states;      // coupling-check (x,y pairs)
  int histogram_bins = 100;                           // tv-decay
  double histogram_lo = -5.0;                         // tv-decay
  double histogram_hi = 5.0;                          // tv-decay
  std::vector<double> checkpoint_times;               // decreasing-step

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace harness
}  // namespace prlmc
