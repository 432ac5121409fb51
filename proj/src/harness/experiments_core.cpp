#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "experiments_util.hpp"
#include "prlmc/harness/experiments.hpp"
#include "prlmc/parallel.hpp"
#include "prlmc/sampler.hpp"
#include "prlmc/stats.hpp"
#include "prlmc/theory.hpp"

namespace prlmc {
namespace harness {

namespace {

nlohmann::ordered_json base_summary(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["config"] = config.to_json();
  return j;
}

double constant_eta(const SamplerConfig& sampler) {
  return std::get<ConstantStep>(sampler.schedule.kind()).eta;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case ExperimentKind::Run: return cmd_run(config);
    case ExperimentKind::BiasSweep: return cmd_bias_sweep(config);
    case ExperimentKind::DriftCheck: return cmd_drift_check(config);
    case ExperimentKind::CouplingCheck: return cmd_coupling_check(config);
    case ExperimentKind::TvDecay: return cmd_tv_decay(config);
    case ExperimentKind::DecreasingStep: return cmd_decreasing_step(config);
    case ExperimentKind::MidpointLaw: return cmd_midpoint_law(config);
    case ExperimentKind::StrongError: return cmd_strong_error(config);
  }
  throw std::logic_error("run_experiment: unknown experiment kind");
}

// ---------------------------------------------------------------------------
// run: checkpointed chains, batch snapshots, summary statistics.
// ---------------------------------------------------------------------------

ExperimentReport cmd_run(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = ExperimentKind::Run;
  report.summary = base_summary(config);
  attach_theory_bounds(report, config);
  for (const auto& warning : config.sampler.validate()) {
    report.add_row({.id = "config.warning", .verdict = Verdict::Info, .detail = warning});
  }

  std::vector<std::int64_t> checkpoints = config.checkpoints;
  if (checkpoints.empty()) checkpoints.push_back(config.steps);
  const std::size_t n_cp = checkpoints.size();
  const int d = config.sampler.potential.dimension();
  const std::int64_t trials = config.trials;

  // Per-trial storage: positions per checkpoint, grad evals, divergence step.
  std::vector<double> positions(static_cast<std::size_t>(trials) * n_cp * d);
  std::vector<std::int64_t> grad_evals(static_cast<std::size_t>(trials) * n_cp, 0);
  std::vector<std::int64_t> diverged_at(static_cast<std::size_t>(trials), -1);

  SamplerConfig sampler = config.sampler;
  sampler.rng = RngPolicy{config.master_seed};
  parallel_blocks(trials, config.threads, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    for (std::int64_t t = begin; t < end; ++t) {
      try {
        RunResult result =
            run_chain(sampler, config.steps, checkpoints, static_cast<std::uint64_t>(t));
        for (std::size_t c = 0; c < n_cp; ++c) {
          const auto& cp = result.checkpoints.at(c);
          std::copy(cp.position.begin(), cp.position.end(),
                    positions.begin() + (static_cast<std::size_t>(t) * n_cp + c) * d);
          grad_evals[static_cast<std::size_t>(t) * n_cp + c] = cp.grad_evals;
        }
      } catch (const DivergenceError& e) {
        diverged_at[static_cast<std::size_t>(t)] = e.step;
      }
    }
  });

  std::int64_t n_diverged = 0;
  std::int64_t first_divergence_step = -1;
  for (std::int64_t t = 0; t < trials; ++t) {
    if (diverged_at[static_cast<std::size_t>(t)] >= 0) {
      ++n_diverged;
      if (first_divergence_step < 0) first_divergence_step = diverged_at[t];
    }
  }

  const std::string out_dir = experiment_output_dir(config);
  ensure_dir(out_dir);
  CsvWriter csv(out_dir + "/checkpoints.csv",
                {"step", "time", "n_trials", "grad_evals_mean", "norm2_mean", "norm2_se",
                 "coord0_mean", "coord0_var", "coord0_var_se"});

  nlohmann::ordered_json cp_json = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < n_cp; ++c) {
    MomentAccumulator norm2_acc, coord0_acc, grad_acc;
    std::vector<double> batch;
    batch.reserve(static_cast<std::size_t>(trials - n_diverged) * d);
    for (std::int64_t t = 0; t < trials; ++t) {
      if (diverged_at[static_cast<std::size_t>(t)] >= 0) continue;
      const double* pos = positions.data() + (static_cast<std::size_t>(t) * n_cp + c) * d;
      double n2 = 0.0;
      for (int j = 0; j < d; ++j) n2 += pos[j] * pos[j];
      norm2_acc.add(n2);
      coord0_acc.add(pos[0]);
      grad_acc.add(static_cast<double>(grad_evals[static_cast<std::size_t>(t) * n_cp + c]));
      batch.insert(batch.end(), pos, pos + d);
    }
    const MeanVar norm2 = norm2_acc.finish();
    const MeanVar coord0 = coord0_acc.finish();
    const MeanVar grads = grad_acc.finish();
    const double time_at_cp = [&] {
      double t = 0.0;
      for (std::int64_t k = 1; k <= checkpoints[c]; ++k) t += config.sampler.schedule.gamma(k);
      return t;
    }();
    csv.row({static_cast<double>(checkpoints[c]), time_at_cp,
             static_cast<double>(norm2.n), grads.mean, norm2.mean, norm2.se_mean(), coord0.mean,
             coord0.variance, coord0.se_variance()});
    if (!batch.empty()) {
      SampleBatch(d, batch).save_binary(out_dir + "/checkpoint_" +
                                        std::to_string(checkpoints[c]) + ".bin");
    }
    nlohmann::ordered_json cj;
    cj["step"] = checkpoints[c];
    cj["time"] = time_at_cp;
    cj["norm2_mean"] = norm2.mean;
    cj["norm2_se"] = norm2.se_mean();
    cj["coord0_var"] = coord0.variance;
    cj["coord0_var_se"] = coord0.se_variance();
    cj["grad_evals_mean"] = grads.mean;
    cp_json.push_back(cj);
  }
  report.summary["checkpoints"] = cp_json;
  report.summary["n_diverged"] = n_diverged;

  if (n_diverged > 0) {
    report.add_row({.id = "run.divergences",
                    .verdict = Verdict::Info,
                    .estimate = static_cast<double>(n_diverged),
                    .detail = "first divergence at step " + std::to_string(first_divergence_step)});
  }

  // Stationary variance identity for the plain Euler chain on the isotropic
  // quadratic target: per-coordinate variance tends to 2 / (theta (2 - eta theta)).
  if (config.sampler.algorithm == Algorithm::Ula &&
      config.sampler.potential.is_isotropic_quadratic() && n_diverged == 0 &&
      config.steps > 0) {
    const double theta = std::get<IsotropicQuadratic>(config.sampler.potential.kind()).theta;
    const double eta = constant_eta(config.sampler);
    const double relaxations = static_cast<double>(config.steps) * eta * theta;
    if (eta * theta < 2.0 && relaxations >= 20.0) {
      const double expected = 2.0 / (theta * (2.0 - eta * theta));
      MomentAccumulator acc;
      const std::size_t c = n_cp - 1;
      for (std::int64_t t = 0; t < trials; ++t) {
        acc.add(positions[(static_cast<std::size_t>(t) * n_cp + c) * d]);
      }
      const MeanVar mv = acc.finish();
      VerdictRow row;
      row.id = "run.ula_stationary_variance";
      row.bound_id = "euler-chain-stationary-variance";
      row.estimate = mv.variance;
      row.se = mv.se_variance();
      row.bound = expected;
      row.verdict =
          std::fabs(mv.variance - expected) <= 3.0 * mv.se_variance() ? Verdict::Pass : Verdict::Fail;
      row.detail = "terminal per-coordinate variance vs 2/(theta(2-eta theta))";
      report.add_row(std::move(row));
    }
  }

  report.write_summary(out_dir);
  return report;
}

// ---------------------------------------------------------------------------
// drift-check: Monte Carlo one-step drift of V(x) = 1 + |x|^2 against the
// lambda/b/radius constants.
// ---------------------------------------------------------------------------

ExperimentReport cmd_drift_check(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = ExperimentKind::DriftCheck;
  report.summary = base_summary(config);
  attach_theory_bounds(report, config);

  const PotentialSpec& potential = config.sampler.potential;
  const double eta = constant_eta(config.sampler);
  const int K = config.sampler.K;
  const int d = potential.dimension();
  const auto drift = theory::lyapunov_constants(potential.m(), potential.L(), K, d, eta);

  report.summary["lambda"] = drift.lambda;
  report.summary["b"] = drift.b;
  report.summary["radius"] = drift.radius;

  const std::string out_dir = experiment_output_dir(config);
  ensure_dir(out_dir);
  CsvWriter csv(out_dir + "/drift.csv",
                {"x_norm", "V", "indicator", "lambda", "b", "bound", "estimate", "se"});

  const RngPolicy policy{config.master_seed};
  for (std::size_t p = 0; p < config.probe_radii.size(); ++p) {
    const double r = config.probe_radii[p];
    std::vector<double> probe(static_cast<std::size_t>(d), 0.0);
    probe[0] = r;  // probes along the first axis
    const double v_of_x = 1.0 + r * r;
    const bool inside = r <= drift.radius;
    const double bound = drift.lambda * v_of_x + (inside ? drift.b : 0.0);

    const RngPolicy probe_policy = policy.sub_policy(0xD51F7 + p);
    const std::int64_t n_blocks = n_blocks_for(config.trials);
    std::vector<MomentAccumulator> partial(static_cast<std::size_t>(n_blocks));
    parallel_blocks(config.trials, config.threads,
                    [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                      KernelScratch scratch;
                      std::vector<double> x;
                      StepNoise noise(probe_policy, 0, 0);
                      for (std::int64_t t = begin; t < end; ++t) {
                        x = probe;
                        noise.rebind(static_cast<std::uint64_t>(t), 0);
                        prlmc_update(x, potential, eta, K, config.sampler.midpoint_noise_mode,
                                     noise, scratch);
                        partial[static_cast<std::size_t>(block)].add(1.0 + norm_sq(x));
                      }
                    });
    MomentAccumulator acc;
    for (const auto& part : partial) acc.merge(part);
    const MeanVar mv = acc.finish();

    csv.row({r, v_of_x, inside ? 1.0 : 0.0, drift.lambda, drift.b, bound, mv.mean, mv.se_mean()});
    report.add_row(bound_row("drift.x_norm=" + CsvWriter::format(r), "drift-lyapunov",
                             mv.mean, mv.se_mean(), 0.0, bound,
                             inside ? "indicator on" : "indicator off"));
  }

  report.write_summary(out_dir);
  return report;
}

// ---------------------------------------------------------------------------
// midpoint-law: triggered-midpoint counts per step vs Binomial(K, 1/K).
// ---------------------------------------------------------------------------

namespace {

// Counts per-step midpoint triggers without changing the kernel.
class CountingNoise final : public NoiseSource {
 public:
  explicit CountingNoise(NoiseSource& inner) : inner_(inner) {}
  void endpoint_gaussian(std::span<double> out) override { inner_.endpoint_gaussian(out); }
  void midpoint_gaussian(std::uint64_t i, std::span<double> out) override {
    inner_.midpoint_gaussian(i, out);
  }
  bool midpoint_hit(std::uint64_t i, double prob) override {
    const bool hit = inner_.midpoint_hit(i, prob);
    if (hit) ++hits;
    return hit;
  }
  double midpoint_time() override { return inner_.midpoint_time(); }
  void bridge_gaussian(std::span<double> out) override { inner_.bridge_gaussian(out); }
  int hits = 0;

 private:
  NoiseSource& inner_;
};

}  // namespace

ExperimentReport cmd_midpoint_law(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = ExperimentKind::MidpointLaw;
  report.summary = base_summary(config);
  attach_theory_bounds(report, config);

  const PotentialSpec& potential = config.sampler.potential;
  const double eta = constant_eta(config.sampler);
  const int K = config.sampler.K;
  const std::int64_t steps_per_trial = config.steps;
  const std::int64_t total_steps = config.trials * steps_per_trial;

  struct BlockTally {
    std::vector<std::int64_t> counts;
    double grad_evals = 0.0;
    double grad_evals_sq = 0.0;
  };
  const std::int64_t n_blocks = n_blocks_for(config.trials);
  std::vector<BlockTally> partial(static_cast<std::size_t>(n_blocks));
  for (auto& p : partial) p.counts.assign(static_cast<std::size_t>(K) + 1, 0);

  const RngPolicy policy{config.master_seed};
  parallel_blocks(config.trials, config.threads,
                  [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                    BlockTally& tally = partial[static_cast<std::size_t>(block)];
                    KernelScratch scratch;
                    for (std::int64_t t = begin; t < end; ++t) {
                      std::vector<double> x = config.sampler.initial;
                      StepNoise base(policy, static_cast<std::uint64_t>(t), 0);
                      for (std::int64_t k = 0; k < steps_per_trial; ++k) {
                        base.rebind(static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
                        CountingNoise counting(base);
                        std::int64_t grads = 0;
                        prlmc_update(x, potential, eta, K, config.sampler.midpoint_noise_mode,
                                     counting, scratch, &grads);
                        ++tally.counts[static_cast<std::size_t>(counting.hits)];
                        tally.grad_evals += static_cast<double>(grads);
                        tally.grad_evals_sq += static_cast<double>(grads) * grads;
                      }
                    }
                  });

  std::vector<std::int64_t> counts(static_cast<std::size_t>(K) + 1, 0);
  MomentAccumulator grad_acc;
  for (const auto& tally : partial) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += tally.counts[i];
    grad_acc.sum += tally.grad_evals;
    grad_acc.sum_sq += tally.grad_evals_sq;
  }
  grad_acc.n = static_cast<std::size_t>(total_steps);

  const std::string out_dir = experiment_output_dir(config);
  ensure_dir(out_dir);
  CsvWriter csv(out_dir + "/counts.csv", {"count", "observed", "expected", "pmf"});

  // Chi-square against the binomial law, merging sparse tail cells.
  double chi2 = 0.0;
  int cells = 0;
  double merged_obs = 0.0, merged_exp = 0.0;
  MomentAccumulator count_acc;
  for (int n = 0; n <= K; ++n) {
    const double pmf = theory::poisson_midpoint_pmf(K, n);
    const double expected = pmf * static_cast<double>(total_steps);
    const double observed = static_cast<double>(counts[static_cast<std::size_t>(n)]);
    csv.row({static_cast<double>(n), observed, expected, pmf});
    count_acc.sum += observed * n;
    count_acc.sum_sq += observed * n * n;
    merged_obs += observed;
    merged_exp += expected;
    if (merged_exp >= 5.0 || n == K) {
      if (merged_exp > 0.0) {
        chi2 += (merged_obs - merged_exp) * (merged_obs - merged_exp) / merged_exp;
        ++cells;
      }
      merged_obs = merged_exp = 0.0;
    }
  }
  count_acc.n = static_cast<std::size_t>(total_steps);
  const MeanVar count_mv = count_acc.finish();
  const double dof = static_cast<double>(cells - 1);
  const double p_value = dof > 0 ? chi_square_pvalue(chi2, dof) : 1.0;

  report.summary["chi2"] = chi2;
  report.summary["chi2_dof"] = dof;
  report.summary["chi2_pvalue"] = p_value;
  report.summary["total_steps"] = total_steps;

  {
    VerdictRow row;
    row.id = "midpoint.chi_square";
    row.bound_id = "midpoint-count-binomial-law";
    row.estimate = p_value;
    row.bound = 0.001;
    row.verdict = p_value > 0.001 ? Verdict::Pass : Verdict::Fail;
    row.detail = "chi2=" + CsvWriter::format(chi2) + " dof=" + CsvWriter::format(dof);
    report.add_row(std::move(row));
  }
  {
    VerdictRow row;
    row.id = "midpoint.mean_count";
    row.bound_id = "midpoint-count-mean-one";
    row.estimate = count_mv.mean;
    row.se = count_mv.se_mean();
    row.bound = 1.0;
    row.verdict =
        std::fabs(count_mv.mean - 1.0) <= 3.0 * count_mv.se_mean() ? Verdict::Pass : Verdict::Fail;
    report.add_row(std::move(row));
  }
  {
    const MeanVar grads = grad_acc.finish();
    const double expected = 1.0 + (static_cast<double>(K) - 1.0) / static_cast<double>(K);
    VerdictRow row;
    row.id = "midpoint.grad_evals_per_step";
    row.bound_id = "lazy-gradient-cost";
    row.estimate = grads.mean;
    row.se = grads.se_mean();
    row.bound = expected;
    row.verdict =
        std::fabs(grads.mean - expected) <= 3.0 * grads.se_mean() ? Verdict::Pass : Verdict::Fail;
    report.add_row(std::move(row));
  }
  {
    const double tv_k = theory::binomial_poisson_tv(K);
    report.add_row({.id = "midpoint.tv_to_poisson.K=" + std::to_string(K),
                    .verdict = Verdict::Info,
                    .estimate = tv_k});
    const double tv_100 = theory::binomial_poisson_tv(100);
    VerdictRow row;
    row.id = "midpoint.tv_to_poisson.K=100";
    row.bound_id = "binomial-to-poisson-limit";
    row.estimate = tv_100;
    row.bound = 0.01;
    row.verdict = tv_100 < 0.01 ? Verdict::Pass : Verdict::Fail;
    report.add_row(std::move(row));
  }

  report.write_summary(out_dir);
  return report;
}

// ---------------------------------------------------------------------------
// strong-error: one-step coupled error vs the step size, order ~ gamma^{3/2}.
// ---------------------------------------------------------------------------

ExperimentReport cmd_strong_error(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = ExperimentKind::StrongError;
  report.summary = base_summary(config);
  attach_theory_bounds(report, config);

  if (!config.sampler.potential.is_isotropic_quadratic()) {
    throw std::invalid_argument("strong-error requires the isotropic quadratic potential");
  }
  const double theta = std::get<IsotropicQuadratic>(config.sampler.potential.kind()).theta;
  const int K = config.sampler.K;
  std::vector<double> grid = config.eta_grid;
  if (grid.empty()) grid = {0.02, 0.04, 0.08, 0.16};
  std::sort(grid.begin(), grid.end());

  const std::string out_dir = experiment_output_dir(config);
  ensure_dir(out_dir);
  CsvWriter csv(out_dir + "/errors.csv", {"gamma", "error", "error_se", "n_trials"});

  const RngPolicy policy{config.master_seed};
  std::vector<double> errors, error_ses;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double gamma = grid[g];
    const RngPolicy gamma_policy = policy.sub_policy(0x5E + g);
    const std::int64_t n_blocks = n_blocks_for(config.trials);
    std::vector<MomentAccumulator> partial(static_cast<std::size_t>(n_blocks));
    parallel_blocks(config.trials, config.threads,
                    [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                      StepNoise noise(gamma_policy, 0, 0);
                      for (std::int64_t t = begin; t < end; ++t) {
                        noise.rebind(static_cast<std::uint64_t>(t), 0);
                        const CoupledPair pair = coupled_step_ou(
                            config.sampler.initial, config.sampler.initial, theta, gamma, K, noise);
                        double diff_sq = 0.0;
                        for (std::size_t j = 0; j < pair.x.size(); ++j) {
                          const double diff = pair.x[j] - pair.y[j];
                          diff_sq += diff * diff;
                        }
                        partial[static_cast<std::size_t>(block)].add(diff_sq);
                      }
                    });
    MomentAccumulator acc;
    for (const auto& part : partial) acc.merge(part);
    const MeanVar mv = acc.finish();
    const double err = std::sqrt(mv.mean);
    const double err_se = err > 0.0 ? mv.se_mean() / (2.0 * err) : 0.0;
    errors.push_back(err);
    error_ses.push_back(err_se);
    csv.row({gamma, err, err_se, static_cast<double>(config.trials)});
  }

  const LogLogFit fit = fit_loglog_slope(grid, errors);
  report.summary["slope"] = fit.slope;
  report.summary["r2"] = fit.r2;
  {
    VerdictRow row;
    row.id = "strong_error.slope";
    row.bound_id = "one-step-strong-error-order";
    row.estimate = fit.slope;
    row.detail = "target window [1.3, 1.7]";
    row.verdict = (fit.slope >= 1.3 && fit.slope <= 1.7) ? Verdict::Pass : Verdict::Fail;
    report.add_row(std::move(row));
  }
  {
    VerdictRow row;
    row.id = "strong_error.r2";
    row.bound_id = "one-step-strong-error-order";
    row.estimate = fit.r2;
    row.bound = 0.98;
    row.verdict = fit.r2 >= 0.98 ? Verdict::Pass : Verdict::Fail;
    report.add_row(std::move(row));
  }

  report.write_summary(out_dir);
  return report;
}

}  // namespace harness
}  // namespace prlmc
