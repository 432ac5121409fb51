#include <algorithm>
#include <cmath>
#include <limits>
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

double require_isotropic(const ExperimentConfig& config, const char* what) {
  if (!config.sampler.potential.is_isotropic_quadratic()) {
    throw std::invalid_argument(std::string(what) + " requires the isotropic quadratic potential");
  }
  return std::get<IsotropicQuadratic>(config.sampler.potential.kind()).theta;
}

// One-step conditional contraction bound for the synchronous coupling, with
// the free parameter epsilon set to kappa/8 so the contraction factor is
// 1 - gamma kappa / 2.
struct CouplingBound {
  double contraction;
  double remainder;
};

CouplingBound one_step_coupling_bound(double m, double L, double l_tilde, int K, int d,
                                      double gamma, double x_norm2, double y_norm2) {
  const double kap = theory::kappa(m, L);
  const double eps = kap / 8.0;
  const double invK = 1.0 / static_cast<double>(K);
  const double L2 = L * L;
  const double L4 = L2 * L2;
  const double dd = static_cast<double>(d);
  CouplingBound out;
  out.contraction = 1.0 - gamma * (kap - 4.0 * eps);
  out.remainder =
      gamma * gamma * gamma *
      (L4 * (gamma + 1.0 / (3.0 * eps)) * x_norm2 +
       L4 * ((8.0 - 4.0 * invK) * gamma + 1.0 / (3.0 * eps)) * y_norm2 +
       L2 * dd * (10.0 - 4.0 * invK + L2 * gamma * gamma / 6.0 + 1.0 / (4.0 * eps) * L2 * gamma) +
       2.0 / (3.0 * eps) * dd * dd * l_tilde * l_tilde);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// coupling-check: one-step contraction inequality at probe states, plus the
// coupled trajectory against the decreasing-step decay bound (constant
// schedule case).
// ---------------------------------------------------------------------------

ExperimentReport cmd_coupling_check(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = ExperimentKind::CouplingCheck;
  report.summary = base_summary(config);
  attach_theory_bounds(report, config);
  const double theta = require_isotropic(config, "coupling-check");
  const double gamma = std::get<ConstantStep>(config.sampler.schedule.kind()).eta;
  const int K = config.sampler.K;
  const int d = config.sampler.potential.dimension();
  const double m = config.sampler.potential.m();
  const double L = config.sampler.potential.L();

  const std::string out_dir = experiment_output_dir(config);
  ensure_dir(out_dir);
  const RngPolicy policy{config.master_seed};

  // Part A: one-step inequality at probe states (scalar pairs placed on the
  // first axis).
  std::vector<std::vector<double>> probes = config.probe_states;
  if (probes.empty()) {
    probes = {{0.0, 0.0}, {1.0, 1.0},  {2.0, 2.0},   {1.0, 0.0},   {0.0, 1.0},
              {2.0, -2.0}, {-1.0, 0.5}, {3.0, 0.0},  {0.5, -0.5},  {5.0, 5.0}};
  }
  CsvWriter probe_csv(out_dir + "/probes.csv",
                      {"x0", "y0", "estimate", "se", "contraction", "remainder", "bound"});
  for (std::size_t p = 0; p < probes.size(); ++p) {
    if (probes[p].size() != 2) throw std::invalid_argument("probe_states entries must be pairs");
    std::vector<double> x0(static_cast<std::size_t>(d), 0.0);
    std::vector<double> y0(static_cast<std::size_t>(d), 0.0);
    x0[0] = probes[p][0];
    y0[0] = probes[p][1];
    const double theta_norm2 = (x0[0] - y0[0]) * (x0[0] - y0[0]);
    const CouplingBound cb = one_step_coupling_bound(m, L, config.sampler.potential.l_tilde(), K,
                                                     d, gamma, norm_sq(x0), norm_sq(y0));
    const double bound = cb.contraction * theta_norm2 + cb.remainder;

    const RngPolicy probe_policy = policy.sub_policy(0xC0 + p);
    const std::int64_t n_blocks = n_blocks_for(config.trials);
    std::vector<MomentAccumulator> partial(static_cast<std::size_t>(n_blocks));
    parallel_blocks(config.trials, config.threads,
                    [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                      StepNoise noise(probe_policy, 0, 0);
                      for (std::int64_t t = begin; t < end; ++t) {
                        noise.rebind(static_cast<std::uint64_t>(t), 0);
                        const CoupledPair pair = coupled_step_ou(x0, y0, theta, gamma, K, noise);
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
    probe_csv.row({x0[0], y0[0], mv.mean, mv.se_mean(), cb.contraction, cb.remainder, bound});
    report.add_row(bound_row("coupling.probe." + CsvWriter::format(x0[0]) + "," +
                                 CsvWriter::format(y0[0]),
                             "coupling-one-step-contraction", mv.mean, mv.se_mean(), 0.0, bound));
  }

  // Part B: coupled trajectory from X0 ~ pi, Y0 = configured initial state.
  std::vector<std::int64_t> checkpoints = config.checkpoints;
  if (checkpoints.empty()) {
    checkpoints = {1, 2, 5, 10, 20, 30, 50, 75, 100};
    checkpoints.erase(std::remove_if(checkpoints.begin(), checkpoints.end(),
                                     [&](std::int64_t n) { return n > config.steps; }),
                      checkpoints.end());
    if (checkpoints.empty() || checkpoints.back() != config.steps) {
      checkpoints.push_back(config.steps);
    }
  }
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    if (checkpoints[c] < 1 || checkpoints[c] > config.steps ||
        (c > 0 && checkpoints[c] <= checkpoints[c - 1])) {
      throw std::invalid_argument(
          "coupling-check: checkpoints must be strictly increasing within [1, steps]");
    }
  }
  const std::size_t n_cp = checkpoints.size();
  const std::int64_t n_blocks = n_blocks_for(config.trials);
  struct TrajectoryAcc {
    std::vector<MomentAccumulator> theta_sq;
    std::vector<MomentAccumulator> x_norm2;
  };
  std::vector<TrajectoryAcc> partial(static_cast<std::size_t>(n_blocks));
  for (auto& part : partial) {
    part.theta_sq.resize(n_cp);
    part.x_norm2.resize(n_cp);
  }
  const RngPolicy traj_policy = policy.sub_policy(0x7247);
  const RngPolicy init_policy = traj_policy.sub_policy(kTagReference);
  const std::vector<double>& y_init = config.sampler.initial;

  parallel_blocks(config.trials, config.threads,
                  [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                    TrajectoryAcc& acc = partial[static_cast<std::size_t>(block)];
                    StepNoise noise(traj_policy, 0, 0);
                    const double sd = 1.0 / std::sqrt(theta);
                    for (std::int64_t t = begin; t < end; ++t) {
                      std::vector<double> x(static_cast<std::size_t>(d));
                      Stream init = derive_stream(init_policy, static_cast<std::uint64_t>(t), 0,
                                                  Purpose::EndpointGaussian);
                      for (auto& v : x) v = sd * init.next_gaussian();
                      std::vector<double> y = y_init;
                      std::size_t next_cp = 0;
                      for (std::int64_t k = 0; k < config.steps && next_cp < n_cp; ++k) {
                        noise.rebind(static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
                        CoupledPair pair = coupled_step_ou(x, y, theta, gamma, K, noise);
                        x = std::move(pair.x);
                        y = std::move(pair.y);
                        if (checkpoints[next_cp] == k + 1) {
                          double diff_sq = 0.0;
                          for (std::size_t j = 0; j < x.size(); ++j) {
                            const double diff = x[j] - y[j];
                            diff_sq += diff * diff;
                          }
                          acc.theta_sq[next_cp].add(diff_sq);
                          acc.x_norm2[next_cp].add(norm_sq(x));
                          ++next_cp;
                        }
                      }
                    }
                  });

  // Decay bound with the exact second-moment supremum as the moment constant.
  const double y0_norm2 = norm_sq(y_init);
  const auto oracle = quadratic_prlmc_moment_oracle(theta, gamma, K, d, y0_norm2, 0);
  const double c_moment = std::max(y0_norm2, oracle.fixed_point);
  std::vector<theory::DecayBound> bounds;
  const bool bound_valid = gamma <= 1.0 / (m + L);
  if (bound_valid) {
    bounds = theory::wasserstein_decay_bound_at(config.sampler.schedule, m, L,
                                                config.sampler.potential.l_tilde(), K, d,
                                                y0_norm2, c_moment, checkpoints);
  }
  report.summary["c_moment"] = c_moment;

  CsvWriter traj_csv(out_dir + "/trajectory.csv",
                     {"step", "theta_sq_mean", "theta_sq_se", "bound", "x_norm2_mean"});
  for (std::size_t c = 0; c < n_cp; ++c) {
    MomentAccumulator theta_acc, x_acc;
    for (const auto& part : partial) {
      theta_acc.merge(part.theta_sq[c]);
      x_acc.merge(part.x_norm2[c]);
    }
    const MeanVar mv = theta_acc.finish();
    const MeanVar xmv = x_acc.finish();
    const double bound = bound_valid
                             ? bounds[c].u1 * (y0_norm2 + static_cast<double>(d) / m) + bounds[c].u2
                             : std::numeric_limits<double>::quiet_NaN();
    traj_csv.row({static_cast<double>(checkpoints[c]), mv.mean, mv.se_mean(), bound, xmv.mean});
    if (bound_valid) {
      report.add_row(bound_row("coupling.trajectory.n=" + std::to_string(checkpoints[c]),
                               "decreasing-step-decay", mv.mean, mv.se_mean(), 0.0, bound));
    }
    if (c + 1 == n_cp) {
      VerdictRow row;
      row.id = "coupling.x_leg_stationary";
      row.bound_id = "diffusion-stationary-moment";
      row.estimate = xmv.mean;
      row.se = xmv.se_mean();
      row.bound = static_cast<double>(d) / theta;
      row.verdict = std::fabs(xmv.mean - static_cast<double>(d) / theta) <= 3.0 * xmv.se_mean()
                        ? Verdict::Pass
                        : Verdict::Fail;
      row.detail = "exact leg second moment vs d/theta";
      report.add_row(std::move(row));
    }
  }
  if (!bound_valid) {
    report.add_row({.id = "coupling.trajectory",
                    .verdict = Verdict::Inconclusive,
                    .detail = "gamma > 1/(m+L): decay bound hypotheses not met"});
  }

  report.write_summary(out_dir);
  return report;
}

// ---------------------------------------------------------------------------
// decreasing-step: polynomial step schedule, distance to the target at
// time-targeted checkpoints against the decay bound; rate-order check.
// ---------------------------------------------------------------------------

ExperimentReport cmd_decreasing_step(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = ExperimentKind::DecreasingStep;
  report.summary = base_summary(config);
  attach_theory_bounds(report, config);
  const double theta = require_isotropic(config, "decreasing-step");
  if (config.sampler.potential.dimension() != 1) {
    throw std::invalid_argument("decreasing-step requires a 1-D target");
  }
  if (config.sampler.schedule.is_constant()) {
    throw std::invalid_argument("decreasing-step requires a polynomial schedule");
  }
  const double m = config.sampler.potential.m();
  const double L = config.sampler.potential.L();
  const int K = config.sampler.K;
  const auto violations = config.sampler.schedule.validate(m, 1.0 / (m + L));
  if (!violations.empty()) {
    std::string msg = "decreasing-step: schedule violates hypotheses:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw std::invalid_argument(msg);
  }

  // Map target times onto step indices.
  std::vector<double> targets = config.checkpoint_times;
  if (targets.empty()) {
    targets = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 14.0, 20.0, 30.0, 40.0, 50.0};
  }
  std::sort(targets.begin(), targets.end());
  std::vector<std::int64_t> checkpoints;
  std::vector<double> checkpoint_times, checkpoint_gammas;
  {
    double t = 0.0;
    std::int64_t k = 0;
    for (double target : targets) {
      while (t < target) {
        ++k;
        t += config.sampler.schedule.gamma(k);
        if (config.steps > 0 && k >= config.steps) break;
      }
      if (t >= target) {
        if (!checkpoints.empty() && checkpoints.back() == k) continue;
        checkpoints.push_back(k);
        checkpoint_times.push_back(t);
        checkpoint_gammas.push_back(config.sampler.schedule.gamma(k));
      }
      if (config.steps > 0 && k >= config.steps) break;
    }
  }
  if (checkpoints.empty()) throw std::invalid_argument("decreasing-step: no reachable checkpoints");
  const std::int64_t n_max = checkpoints.back();
  const std::size_t n_cp = checkpoints.size();

  // Precompute the step sizes once; the runs and the bound share them.
  std::vector<double> gammas(static_cast<std::size_t>(n_max));
  for (std::int64_t k = 1; k <= n_max; ++k) {
    gammas[static_cast<std::size_t>(k - 1)] = config.sampler.schedule.gamma(k);
  }

  const RngPolicy policy{config.master_seed};
  const std::vector<double>& x_init = config.sampler.initial;
  const double x0_norm2 = norm_sq(x_init);
  const PotentialSpec& potential = config.sampler.potential;

  std::vector<double> positions(static_cast<std::size_t>(config.trials) * n_cp);
  parallel_blocks(config.trials, config.threads,
                  [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                    KernelScratch scratch;
                    StepNoise noise(policy, 0, 0);
                    for (std::int64_t t = begin; t < end; ++t) {
                      std::vector<double> x = x_init;
                      std::size_t next_cp = 0;
                      for (std::int64_t k = 0; k < n_max && next_cp < n_cp; ++k) {
                        noise.rebind(static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
                        prlmc_update(x, potential, gammas[static_cast<std::size_t>(k)], K,
                                     config.sampler.midpoint_noise_mode, noise, scratch);
                        if (checkpoints[next_cp] == k + 1) {
                          positions[static_cast<std::size_t>(t) * n_cp + next_cp] = x[0];
                          ++next_cp;
                        }
                      }
                    }
                  });

  // Exact moment trace supplies the moment constant for the decay bound.
  const auto trace =
      quadratic_prlmc_moment_trace(theta, config.sampler.schedule, K, 1, x0_norm2, n_max);
  const double c_moment = trace.supremum;
  const auto bounds = theory::wasserstein_decay_bound_at(
      config.sampler.schedule, m, L, potential.l_tilde(), K, 1, x0_norm2, c_moment, checkpoints);
  report.summary["c_moment"] = c_moment;

  const double floor = w2_noise_floor(policy, theta, config.trials, 4);
  report.summary["floor"] = floor;

  const std::string out_dir = experiment_output_dir(config);
  ensure_dir(out_dir);
  CsvWriter csv(out_dir + "/checkpoints.csv",
                {"step", "t_n", "gamma_n", "w2", "w2_se", "w2_debiased", "floor", "bound_w2",
                 "ratio_w2_gamma", "in_window"});

  std::vector<double> w2_values(n_cp), w2_ses(n_cp), w2_adj(n_cp);
  for (std::size_t c = 0; c < n_cp; ++c) {
    std::vector<double> batch(static_cast<std::size_t>(config.trials));
    for (std::int64_t t = 0; t < config.trials; ++t) {
      batch[static_cast<std::size_t>(t)] = positions[static_cast<std::size_t>(t) * n_cp + c];
    }
    const W2Estimate est = w2_vs_exact(policy.sub_policy(0xDC + c), std::move(batch), theta, 1, 12);
    w2_values[c] = est.value;
    w2_ses[c] = est.se;
    // The empirical estimator saturates at the same-law floor; subtracting it
    // in quadrature recovers the resolvable part of the true distance.
    w2_adj[c] = std::sqrt(std::max(est.value * est.value - floor * floor, 0.0));
  }

  std::vector<std::size_t> window;
  for (std::size_t c = 0; c < n_cp; ++c) {
    const double bound_w2 =
        std::sqrt(bounds[c].u1 * (x0_norm2 + 1.0 / m) + bounds[c].u2);
    const bool in_window = w2_adj[c] >= 2.0 * floor;
    if (in_window) window.push_back(c);
    csv.row({static_cast<double>(checkpoints[c]), checkpoint_times[c], checkpoint_gammas[c],
             w2_values[c], w2_ses[c], w2_adj[c], floor, bound_w2,
             w2_adj[c] / checkpoint_gammas[c], in_window ? 1.0 : 0.0});
    report.add_row(bound_row("decreasing.w2_bound.t=" + CsvWriter::format(checkpoint_times[c]),
                             "decreasing-step-decay", w2_values[c], w2_ses[c], 2.0 * floor,
                             bound_w2));
  }

  // Monotone decrease within 2 SE.
  bool monotone = true;
  for (std::size_t c = 1; c < n_cp; ++c) {
    const double tol = 2.0 * std::sqrt(w2_ses[c] * w2_ses[c] + w2_ses[c - 1] * w2_ses[c - 1]);
    if (w2_values[c] > w2_values[c - 1] + tol) monotone = false;
  }
  {
    VerdictRow row;
    row.id = "decreasing.monotone";
    row.bound_id = "distance-convergence";
    row.verdict = monotone ? Verdict::Pass : Verdict::Fail;
    row.detail = "checkpoint distances non-increasing within 2 SE";
    report.add_row(std::move(row));
  }
  {
    VerdictRow row;
    row.id = "decreasing.terminal_floor";
    row.bound_id = "distance-convergence";
    row.estimate = w2_values.back();
    row.bound = 2.0 * floor;
    row.verdict = w2_values.back() <= 2.0 * floor ? Verdict::Pass : Verdict::Fail;
    row.detail = "terminal distance at t=" + CsvWriter::format(checkpoint_times.back());
    report.add_row(std::move(row));
  }
  // Rate order: on the resolvable window the debiased distance must shrink
  // at least at the order of the step size (log-log slope >= 0.9); a slower
  // order would make the distance/step-size ratio diverge.
  if (window.size() >= 3) {
    std::vector<double> gs, ws;
    for (const std::size_t c : window) {
      gs.push_back(checkpoint_gammas[c]);
      ws.push_back(w2_adj[c]);
    }
    const LogLogFit fit = fit_loglog_slope(gs, ws);
    report.summary["rate_order_slope"] = fit.slope;
    report.summary["rate_order_r2"] = fit.r2;
    {
      VerdictRow row;
      row.id = "decreasing.rate_order";
      row.bound_id = "distance-order-gamma";
      row.estimate = fit.slope;
      row.bound = 0.9;
      row.verdict = fit.slope >= 0.9 ? Verdict::Pass : Verdict::Fail;
      row.detail = "log-log slope of debiased w2 vs gamma_n over " +
                   std::to_string(window.size()) + " resolvable checkpoints";
      report.add_row(std::move(row));
    }
    const std::size_t take = std::min<std::size_t>(window.size(), 5);
    double ratio_min = std::numeric_limits<double>::infinity();
    double ratio_max = 0.0;
    for (std::size_t i = window.size() - take; i < window.size(); ++i) {
      const double ratio = w2_adj[window[i]] / checkpoint_gammas[window[i]];
      ratio_min = std::min(ratio_min, ratio);
      ratio_max = std::max(ratio_max, ratio);
    }
    VerdictRow row;
    row.id = "decreasing.rate_ratio";
    row.bound_id = "distance-order-gamma";
    row.estimate = ratio_max / ratio_min;
    row.detail = "max/min of debiased w2 / gamma over the last " + std::to_string(take) +
                 " resolvable checkpoints";
    row.verdict = Verdict::Info;
    report.add_row(std::move(row));
  } else {
    report.add_row({.id = "decreasing.rate_order",
                    .verdict = Verdict::Inconclusive,
                    .detail = "fewer than 3 checkpoints above the noise floor"});
  }

  report.write_summary(out_dir);
  return report;
}

}  // namespace harness
}  // namespace prlmc
