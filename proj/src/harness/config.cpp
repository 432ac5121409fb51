#include "prlmc/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace prlmc {
namespace harness {

namespace {

using nlohmann::json;

PotentialSpec potential_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "isotropic-quadratic") {
    return PotentialSpec::isotropic_quadratic(j.at("theta").get<double>(),
                                              j.at("dimension").get<int>());
  }
  if (kind == "anisotropic-quadratic") {
    return PotentialSpec::anisotropic_quadratic(j.at("spectrum").get<std::vector<double>>());
  }
  if (kind == "quadratic-log-cosh") {
    return PotentialSpec::quadratic_log_cosh(j.at("theta").get<double>(),
                                             j.at("alpha").get<double>(),
                                             j.at("dimension").get<int>());
  }
  throw std::invalid_argument("unknown potential kind: " + kind);
}

json potential_to_json(const PotentialSpec& p) {
  json j;
  if (const auto* iso = std::get_if<IsotropicQuadratic>(&p.kind())) {
    j["kind"] = "isotropic-quadratic";
    j["theta"] = iso->theta;
    j["dimension"] = p.dimension();
  } else if (const auto* ani = std::get_if<AnisotropicQuadratic>(&p.kind())) {
    j["kind"] = "anisotropic-quadratic";
    j["spectrum"] = ani->spectrum;
  } else {
    const auto& lc = std::get<QuadraticLogCosh>(p.kind());
    j["kind"] = "quadratic-log-cosh";
    j["theta"] = lc.theta;
    j["alpha"] = lc.alpha;
    j["dimension"] = p.dimension();
  }
  j["m"] = p.m();
  j["L"] = p.L();
  j["l_tilde"] = p.l_tilde();
  return j;
}

StepSchedule schedule_from_json(const json& j, const PotentialSpec& p) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    return StepSchedule::constant(j.at("eta").get<double>());
  }
  if (kind == "polynomial") {
    const double c = j.at("c").get<double>();
    const double alpha = j.at("alpha").get<double>();
    std::int64_t offset = 0;
    if (j.contains("offset")) {
      if (j.at("offset").is_string() && j.at("offset").get<std::string>() == "auto") {
        // Smallest integer offset making gamma_1 admissible for the
        // decreasing-step bounds: c (1 + offset)^{-alpha} <= 1/(m+L).
        const double cap = 1.0 / (p.m() + p.L());
        while (c * std::pow(static_cast<double>(1 + offset), -alpha) > cap) ++offset;
      } else {
        offset = j.at("offset").get<std::int64_t>();
      }
    }
    return StepSchedule::polynomial(c, alpha, offset);
  }
  throw std::invalid_argument("unknown schedule kind: " + kind);
}

json schedule_to_json(const StepSchedule& s) {
  json j;
  if (const auto* c = std::get_if<ConstantStep>(&s.kind())) {
    j["kind"] = "constant";
    j["eta"] = c->eta;
  } else {
    const auto& p = std::get<PolynomialStep>(s.kind());
    j["kind"] = "polynomial";
    j["c"] = p.c;
    j["alpha"] = p.alpha;
    j["offset"] = p.offset;
  }
  return j;
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "ula") return Algorithm::Ula;
  if (name == "rlmc") return Algorithm::Rlmc;
  if (name == "prlmc") return Algorithm::Prlmc;
  if (name == "prlmc-decreasing") return Algorithm::PrlmcDecreasing;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string algorithm_to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Ula: return "ula";
    case Algorithm::Rlmc: return "rlmc";
    case Algorithm::Prlmc: return "prlmc";
    case Algorithm::PrlmcDecreasing: return "prlmc-decreasing";
  }
  return "?";
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Run: return "run";
    case ExperimentKind::BiasSweep: return "bias-sweep";
    case ExperimentKind::DriftCheck: return "drift-check";
    case ExperimentKind::CouplingCheck: return "coupling-check";
    case ExperimentKind::TvDecay: return "tv-decay";
    case ExperimentKind::DecreasingStep: return "decreasing-step";
    case ExperimentKind::MidpointLaw: return "midpoint-law";
    case ExperimentKind::StrongError: return "strong-error";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto kind : {ExperimentKind::Run, ExperimentKind::BiasSweep,
                          ExperimentKind::DriftCheck, ExperimentKind::CouplingCheck,
                          ExperimentKind::TvDecay, ExperimentKind::DecreasingStep,
                          ExperimentKind::MidpointLaw, ExperimentKind::StrongError}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown experiment: " + name);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  const json& js = j.at("sampler");
  PotentialSpec potential = potential_from_json(js.at("potential"));
  StepSchedule schedule = schedule_from_json(js.at("schedule"), potential);

  SamplerConfig sampler{
      .algorithm = algorithm_from_string(js.at("algorithm").get<std::string>()),
      .K = js.value("K", 1),
      .potential = std::move(potential),
      .schedule = std::move(schedule),
      .initial = js.value("initial", std::vector<double>{}),
      .midpoint_noise_mode = MidpointNoiseMode::IndependentPerIndex,
      .rng = RngPolicy{j.value("master_seed", std::uint64_t{0})},
  };
  if (sampler.initial.empty()) {
    sampler.initial.assign(static_cast<std::size_t>(sampler.potential.dimension()), 0.0);
  }
  if (js.contains("midpoint_noise_mode")) {
    const std::string mode = js.at("midpoint_noise_mode").get<std::string>();
    if (mode == "independent") {
      sampler.midpoint_noise_mode = MidpointNoiseMode::IndependentPerIndex;
    } else if (mode == "shared-driver") {
      sampler.midpoint_noise_mode = MidpointNoiseMode::SharedDriver;
    } else {
      throw std::invalid_argument("unknown midpoint_noise_mode: " + mode);
    }
  }

  ExperimentConfig cfg{
      .experiment = experiment_kind_from_string(j.at("experiment").get<std::string>()),
      .sampler = std::move(sampler),
      .trials = j.value("trials", std::int64_t{1}),
      .steps = j.value("steps", std::int64_t{0}),
      .checkpoints = j.value("checkpoints", std::vector<std::int64_t>{}),
      .eta_grid = j.value("eta_grid", std::vector<double>{}),
      .master_seed = j.value("master_seed", std::uint64_t{0}),
      .output = j.value("output", std::string{"out"}),
      .threads = j.value("threads", 0),
  };
  cfg.probe_radii = j.value("probe_radii", cfg.probe_radii);
  cfg.probe_states = j.value("probe_states", std::vector<std::vector<double>>{});
  cfg.histogram_bins = j.value("histogram_bins", 100);
  if (j.contains("histogram_range")) {
    const auto range = j.at("histogram_range").get<std::vector<double>>();
    if (range.size() != 2) throw std::invalid_argument("histogram_range must have 2 entries");
    cfg.histogram_lo = range[0];
    cfg.histogram_hi = range[1];
  }
  cfg.checkpoint_times = j.value("checkpoint_times", std::vector<double>{});
  if (cfg.trials < 1) throw std::invalid_argument("trials must be positive");
  if (cfg.steps < 0) throw std::invalid_argument("steps must be nonnegative");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json js;
  js["algorithm"] = algorithm_to_string(sampler.algorithm);
  js["K"] = sampler.K;
  js["potential"] = potential_to_json(sampler.potential);
  js["schedule"] = schedule_to_json(sampler.schedule);
  js["initial"] = sampler.initial;
  js["midpoint_noise_mode"] =
      sampler.midpoint_noise_mode == MidpointNoiseMode::SharedDriver ? "shared-driver"
                                                                     : "independent";
  json j;
  j["experiment"] = to_string(experiment);
  j["sampler"] = js;
  j["trials"] = trials;
  j["steps"] = steps;
  j["checkpoints"] = checkpoints;
  j["eta_grid"] = eta_grid;
  j["master_seed"] = master_seed;
  j["output"] = output;
  j["threads"] = threads;
  j["probe_radii"] = probe_radii;
  j["probe_states"] = probe_states;
  j["histogram_bins"] = histogram_bins;
  j["histogram_range"] = std::vector<double>{histogram_lo, histogram_hi};
  j["checkpoint_times"] = checkpoint_times;
  return j;
}

}  // namespace harness
}  // namespace prlmc
