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

double require_isotropic_1d(const ExperimentConfig& config, const char* what) {
  if (!config.sampler.potential.is_isotropic_quadratic() ||
      config.sampler.potential.dimension() != 1) {
    throw std::invalid_argument(std::string(what) +
                                " requires the 1-D isotropic quadratic potential");
  }
  return std::get<IsotropicQuadratic>(config.sampler.potential.kind()).theta;
}

}  // namespace

// ---------------------------------------------------------------------------
// bias-sweep: stationary bias of the constant-step chain over an eta grid,
// against both stationary-bias bounds and the exact second-moment recursion.
//
// Interpretation of the budget fields: `trials` independent chains per eta,
// each contributing `steps` thinned post-burn-in samples.
// ---------------------------------------------------------------------------

ExperimentReport cmd_bias_sweep(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = ExperimentKind::BiasSweep;
  report.summary = base_summary(config);
  attach_theory_bounds(report, config);
  const double theta = require_isotropic_1d(config, "bias-sweep");
  if (config.eta_grid.size() < 4) {
    throw std::invalid_argument("bias-sweep requires an eta grid with >= 4 points");
  }
  if (config.steps < 2) {
    throw std::invalid_argument("bias-sweep requires steps >= 2 (samples per chain)");
  }
  const int K = config.sampler.K;
  const double m = config.sampler.potential.m();
  const double L = config.sampler.potential.L();
  const double eta0 = theory::find_eta0(m, L, K);
  const PotentialSpec& potential = config.sampler.potential;

  std::vector<double> grid = config.eta_grid;
  std::sort(grid.begin(), grid.end());

  const std::string out_dir = experiment_output_dir(config);
  ensure_dir(out_dir);
  CsvWriter csv(out_dir + "/sweep.csv",
                {"eta", "n_samples", "w2", "w2_se", "w2_floor", "w2_bound_sqrt",
                 "w2sq", "w2sq_bound_sharp", "m2", "m2_se", "m2_oracle", "m2_bound"});

  const RngPolicy policy{config.master_seed};
  std::vector<double> usable_etas, usable_w2;
  nlohmann::ordered_json per_eta = nlohmann::ordered_json::array();

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double eta = grid[g];
    if (eta >= eta0) {
      report.add_row({.id = "bias.eta=" + CsvWriter::format(eta),
                      .verdict = Verdict::Inconclusive,
                      .detail = "skipped: eta >= eta0 = " + CsvWriter::format(eta0)});
      continue;
    }
    const RngPolicy eta_policy = policy.sub_policy(0xB1A5 + g);
    const std::int64_t chains = config.trials;
    const std::int64_t per_chain = config.steps;
    const std::int64_t burn_in = static_cast<std::int64_t>(std::ceil(10.0 / (m * eta)));
    const std::int64_t thin = static_cast<std::int64_t>(std::ceil(1.0 / (m * eta)));
    const std::int64_t chain_steps = burn_in + per_chain * thin;
    const std::int64_t n_samples = chains * per_chain;

    std::vector<double> samples(static_cast<std::size_t>(n_samples));
    std::vector<double> chain_mean_m2(static_cast<std::size_t>(chains));
    std::vector<double> chain_half_diff(static_cast<std::size_t>(chains));

    parallel_blocks(chains, config.threads,
                    [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                      KernelScratch scratch;
                      StepNoise noise(eta_policy, 0, 0);
                      for (std::int64_t t = begin; t < end; ++t) {
                        std::vector<double> x = config.sampler.initial;
                        double m2_first = 0.0, m2_second = 0.0;
                        std::int64_t collected = 0;
                        for (std::int64_t k = 0; k < chain_steps; ++k) {
                          noise.rebind(static_cast<std::uint64_t>(t),
                                       static_cast<std::uint64_t>(k));
                          prlmc_update(x, potential, eta, K,
                                       config.sampler.midpoint_noise_mode, noise, scratch);
                          if (k >= burn_in && (k - burn_in + 1) % thin == 0 &&
                              collected < per_chain) {
                            samples[static_cast<std::size_t>(t * per_chain + collected)] = x[0];
                            const double x2 = x[0] * x[0];
                            if (collected * 2 < per_chain) {
                              m2_first += x2;
                            } else {
                              m2_second += x2;
                            }
                            ++collected;
                          }
                        }
                        const double n_first = std::ceil(static_cast<double>(per_chain) / 2.0);
                        const double n_second = static_cast<double>(per_chain) - n_first;
                        chain_mean_m2[static_cast<std::size_t>(t)] =
                            (m2_first + m2_second) / static_cast<double>(per_chain);
                        chain_half_diff[static_cast<std::size_t>(t)] =
                            m2_second / n_second - m2_first / n_first;
                      }
                    });

    // Second moment and stationarity trend from independent chain means.
    const MeanVar m2 = mean_var(chain_mean_m2);
    const MeanVar trend = mean_var(chain_half_diff);
    const auto oracle = quadratic_prlmc_moment_oracle(theta, eta, K, 1, 0.0, 0);
    const double m2_bound = theory::stationary_moment_bound(m, L, K, 1, eta);

    const W2Estimate w2 = w2_vs_exact(eta_policy, samples, theta, per_chain, 12);
    const double floor = w2_noise_floor(eta_policy, theta, n_samples, 3);
    const double sqrt_bound = theory::w2_bias_bound_sqrt(m, L, K, 1, eta, oracle.fixed_point);
    const double sharp_bound = theory::w2_bias_bound_sharp(
        m, L, config.sampler.potential.l_tilde(), K, 1, eta);

    csv.row({eta, static_cast<double>(n_samples), w2.value, w2.se, floor, sqrt_bound,
             w2.value * w2.value, sharp_bound, m2.mean, m2.se_mean(), oracle.fixed_point,
             m2_bound});

    nlohmann::ordered_json ej;
    ej["eta"] = eta;
    ej["w2"] = w2.value;
    ej["w2_se"] = w2.se;
    ej["w2_floor"] = floor;
    ej["w2_bound_sqrt"] = sqrt_bound;
    ej["w2sq_bound_sharp"] = sharp_bound;
    ej["m2"] = m2.mean;
    ej["m2_se"] = m2.se_mean();
    ej["m2_oracle"] = oracle.fixed_point;
    ej["m2_bound"] = m2_bound;
    per_eta.push_back(ej);

    const std::string tag = "eta=" + CsvWriter::format(eta);
    report.add_row(bound_row("bias.w2_sqrt_bound." + tag, "stationary-bias-sqrt-eta", w2.value,
                             w2.se, 2.0 * floor, sqrt_bound));
    {
      // Squared-distance bound, checked on the distance scale.
      const double adjusted = std::max(w2.value - 2.0 * floor - 3.0 * w2.se, 0.0);
      VerdictRow row;
      row.id = "bias.w2_sharp_bound." + tag;
      row.bound_id = "stationary-bias-sharp-eta-squared";
      row.estimate = w2.value * w2.value;
      row.se = 2.0 * w2.value * w2.se;
      row.bound = sharp_bound;
      row.verdict = adjusted * adjusted <= sharp_bound ? Verdict::Pass : Verdict::Fail;
      row.detail = "checked as (w2 - 2*floor - 3*se)^2 <= bound";
      report.add_row(std::move(row));
    }
    {
      VerdictRow row;
      row.id = "bias.m2_matches_oracle." + tag;
      row.bound_id = "second-moment-recursion";
      row.estimate = m2.mean;
      row.se = m2.se_mean();
      row.bound = oracle.fixed_point;
      row.verdict = std::fabs(m2.mean - oracle.fixed_point) <= 3.0 * m2.se_mean()
                        ? Verdict::Pass
                        : Verdict::Fail;
      report.add_row(std::move(row));
    }
    report.add_row(bound_row("bias.m2_bound." + tag, "stationary-moment", m2.mean, m2.se_mean(),
                             0.0, m2_bound));
    {
      VerdictRow row;
      row.id = "bias.stationarity_trend." + tag;
      row.bound_id = "burn-in-adequacy";
      row.estimate = trend.mean;
      row.se = trend.se_mean();
      row.verdict =
          std::fabs(trend.mean) <= 3.0 * trend.se_mean() ? Verdict::Pass : Verdict::Inconclusive;
      row.detail = "second-moment drift between collection halves";
      report.add_row(std::move(row));
    }

    usable_etas.push_back(eta);
    usable_w2.push_back(w2.value);
  }

  report.summary["per_eta"] = per_eta;
  if (usable_etas.size() >= 3) {
    const LogLogFit fit = fit_loglog_slope(usable_etas, usable_w2);
    report.summary["slope"] = fit.slope;
    report.summary["r2"] = fit.r2;
    {
      VerdictRow row;
      row.id = "bias.slope";
      row.bound_id = "stationary-bias-order";
      row.estimate = fit.slope;
      row.bound = 0.9;
      row.verdict = fit.slope >= 0.9 ? Verdict::Pass : Verdict::Fail;
      row.detail = "log-log slope of w2 bias vs eta, expected near 1";
      report.add_row(std::move(row));
    }
    {
      VerdictRow row;
      row.id = "bias.slope_r2";
      row.bound_id = "stationary-bias-order";
      row.estimate = fit.r2;
      row.bound = 0.9;
      row.verdict = fit.r2 >= 0.9 ? Verdict::Pass : Verdict::Fail;
      report.add_row(std::move(row));
    }
  } else {
    report.add_row({.id = "bias.slope",
                    .verdict = Verdict::Inconclusive,
                    .detail = "fewer than 3 usable eta points"});
  }

  report.write_summary(out_dir);
  return report;
}

// ---------------------------------------------------------------------------
// tv-decay: total variation distance to the stationary histogram along the
// chain, fitted for geometric decay on the resolvable window.
// ---------------------------------------------------------------------------

ExperimentReport cmd_tv_decay(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = ExperimentKind::TvDecay;
  report.summary = base_summary(config);
  attach_theory_bounds(report, config);
  require_isotropic_1d(config, "tv-decay");
  const double m = config.sampler.potential.m();
  const double L = config.sampler.potential.L();
  const int K = config.sampler.K;
  const double eta = std::get<ConstantStep>(config.sampler.schedule.kind()).eta;
  if (eta >= theory::find_eta0(m, L, K)) {
    throw std::invalid_argument("tv-decay requires eta < eta0");
  }
  const PotentialSpec& potential = config.sampler.potential;
  const int bins = config.histogram_bins;
  const double lo = config.histogram_lo;
  const double hi = config.histogram_hi;
  if (bins < 2 || !(hi > lo)) throw std::invalid_argument("tv-decay: bad histogram settings");

  // Checkpoint grid: dense early, sparse late.
  std::vector<std::int64_t> checkpoints = config.checkpoints;
  if (checkpoints.empty()) {
    for (std::int64_t n = 0; n <= std::min<std::int64_t>(40, config.steps); n += 2) {
      checkpoints.push_back(n);
    }
    for (std::int64_t n = 50; n <= config.steps; n += 10) checkpoints.push_back(n);
    if (checkpoints.back() != config.steps) checkpoints.push_back(config.steps);
  }
  const std::size_t n_cp = checkpoints.size();

  const double scale = static_cast<double>(bins) / (hi - lo);
  const auto bin_of = [&](double x) {
    const auto raw = static_cast<std::int64_t>(std::floor((x - lo) * scale));
    return static_cast<std::size_t>(std::clamp<std::int64_t>(raw, 0, bins - 1));
  };

  const RngPolicy policy{config.master_seed};

  // Probe chains: histogram of the law at each checkpoint.
  const std::int64_t n_blocks = n_blocks_for(config.trials);
  std::vector<std::vector<std::int64_t>> probe_hist_partial(
      static_cast<std::size_t>(n_blocks),
      std::vector<std::int64_t>(n_cp * static_cast<std::size_t>(bins), 0));
  parallel_blocks(config.trials, config.threads,
                  [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                    auto& hist = probe_hist_partial[static_cast<std::size_t>(block)];
                    KernelScratch scratch;
                    StepNoise noise(policy, 0, 0);
                    for (std::int64_t t = begin; t < end; ++t) {
                      std::vector<double> x = config.sampler.initial;
                      std::size_t next_cp = 0;
                      for (std::int64_t k = 0; k <= config.steps; ++k) {
                        while (next_cp < n_cp && checkpoints[next_cp] == k) {
                          ++hist[next_cp * bins + bin_of(x[0])];
                          ++next_cp;
                        }
                        if (k == config.steps) break;
                        noise.rebind(static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(k));
                        prlmc_update(x, potential, eta, K, config.sampler.midpoint_noise_mode,
                                     noise, scratch);
                      }
                    }
                  });
  std::vector<std::int64_t> probe_hist(n_cp * static_cast<std::size_t>(bins), 0);
  for (const auto& part : probe_hist_partial) {
    for (std::size_t i = 0; i < probe_hist.size(); ++i) probe_hist[i] += part[i];
  }

  // Reference chains: converged histogram (terminal state well past the probe
  // horizon), split by trial parity for the noise floor.
  const std::int64_t relax = static_cast<std::int64_t>(std::ceil(1.0 / (m * eta)));
  const std::int64_t ref_steps = config.steps + 5 * relax;
  const RngPolicy ref_policy = policy.sub_policy(kTagReference);
  std::vector<std::vector<std::int64_t>> ref_hist_partial(
      static_cast<std::size_t>(n_blocks), std::vector<std::int64_t>(2 * bins, 0));
  parallel_blocks(config.trials, config.threads,
                  [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                    auto& hist = ref_hist_partial[static_cast<std::size_t>(block)];
                    KernelScratch scratch;
                    StepNoise noise(ref_policy, 0, 0);
                    for (std::int64_t t = begin; t < end; ++t) {
                      std::vector<double> x = config.sampler.initial;
                      for (std::int64_t k = 0; k < ref_steps; ++k) {
                        noise.rebind(static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(k));
                        prlmc_update(x, potential, eta, K, config.sampler.midpoint_noise_mode,
                                     noise, scratch);
                      }
                      ++hist[static_cast<std::size_t>(t % 2) * bins + bin_of(x[0])];
                    }
                  });
  std::vector<std::int64_t> ref_hist(2 * static_cast<std::size_t>(bins), 0);
  for (const auto& part : ref_hist_partial) {
    for (std::size_t i = 0; i < ref_hist.size(); ++i) ref_hist[i] += part[i];
  }

  const auto tv_between = [&](const std::int64_t* a, double na, const std::int64_t* b, double nb) {
    double acc = 0.0;
    for (int k = 0; k < bins; ++k) {
      acc += std::fabs(static_cast<double>(a[k]) / na - static_cast<double>(b[k]) / nb);
    }
    return 0.5 * acc;
  };

  double n_even = 0.0, n_odd = 0.0;
  for (int k = 0; k < bins; ++k) {
    n_even += static_cast<double>(ref_hist[k]);
    n_odd += static_cast<double>(ref_hist[bins + k]);
  }
  std::vector<std::int64_t> ref_total(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) ref_total[k] = ref_hist[k] + ref_hist[bins + k];

  // Half-vs-half distance estimates the same-law floor at n/2; the floor at
  // full sample size is a factor sqrt(2) smaller.
  const double floor =
      tv_between(ref_hist.data(), n_even, ref_hist.data() + bins, n_odd) / std::sqrt(2.0);

  const std::string out_dir = experiment_output_dir(config);
  ensure_dir(out_dir);
  CsvWriter csv(out_dir + "/tv.csv", {"step", "tv", "floor", "in_window"});

  const double n_probe = static_cast<double>(config.trials);
  const double n_ref = n_even + n_odd;
  std::vector<double> window_steps, window_log_tv, tv_values;
  for (std::size_t c = 0; c < n_cp; ++c) {
    const double tv = tv_between(probe_hist.data() + c * bins, n_probe, ref_total.data(), n_ref);
    tv_values.push_back(tv);
    // Fit window: distance resolvable above the floor and past the
    // disjoint-support plateau where the histogram distance saturates near 1.
    const bool in_window = tv >= 5.0 * floor && tv <= 0.9;
    csv.row({static_cast<double>(checkpoints[c]), tv, floor, in_window ? 1.0 : 0.0});
    if (in_window) {
      window_steps.push_back(static_cast<double>(checkpoints[c]));
      window_log_tv.push_back(std::log(tv));
    }
  }

  report.summary["floor"] = floor;
  report.summary["terminal_tv"] = tv_values.back();
  report.summary["initial_tv"] = tv_values.front();

  {
    VerdictRow row;
    row.id = "tv.terminal";
    row.bound_id = "stationarity-noise-floor";
    row.estimate = tv_values.back();
    row.bound = 0.02;
    row.verdict = tv_values.back() <= 0.02 ? Verdict::Pass : Verdict::Fail;
    report.add_row(std::move(row));
  }

  if (window_steps.size() < 3) {
    report.add_row({.id = "tv.decay_fit",
                    .verdict = Verdict::Inconclusive,
                    .detail = "noise floor reached before 3 usable points"});
  } else {
    const LinearFit fit = fit_linear(window_steps, window_log_tv);
    report.summary["fit_slope"] = fit.slope;
    report.summary["fit_r2"] = fit.r2;
    report.summary["fit_points"] = window_steps.size();
    {
      VerdictRow row;
      row.id = "tv.decay_slope";
      row.bound_id = "tv-geometric-decay";
      row.estimate = fit.slope;
      row.verdict = fit.slope < 0.0 ? Verdict::Pass : Verdict::Fail;
      row.detail = "log TV vs n over " + std::to_string(window_steps.size()) + " window points";
      report.add_row(std::move(row));
    }
    {
      VerdictRow row;
      row.id = "tv.decay_r2";
      row.bound_id = "tv-geometric-decay";
      row.estimate = fit.r2;
      row.bound = 0.9;
      row.verdict = fit.r2 >= 0.9 ? Verdict::Pass : Verdict::Fail;
      report.add_row(std::move(row));
    }
    // Monotone trend inside the window.
    bool monotone = true;
    for (std::size_t w = 1; w < window_log_tv.size(); ++w) {
      if (std::exp(window_log_tv[w]) > std::exp(window_log_tv[w - 1]) + 2.0 * floor) {
        monotone = false;
      }
    }
    VerdictRow row;
    row.id = "tv.monotone_window";
    row.bound_id = "tv-geometric-decay";
    row.verdict = monotone ? Verdict::Pass : Verdict::Fail;
    row.detail = "TV non-increasing within 2x floor across the window";
    report.add_row(std::move(row));
  }

  report.write_summary(out_dir);
  return report;
}

}  // namespace harness
}  // namespace prlmc
