#include "prlmc/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "prlmc/stats.hpp"
#include "prlmc/theory.hpp"

namespace prlmc {

namespace {

bool all_finite(const std::vector<double>& x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> SamplerConfig::validate() const {
  if (static_cast<int>(initial.size()) != potential.dimension()) {
    throw std::invalid_argument("SamplerConfig: initial state dimension mismatch");
  }
  if (K < 1) throw std::invalid_argument("SamplerConfig: K must be >= 1");
  const bool fixed_step = algorithm != Algorithm::PrlmcDecreasing;
  if (fixed_step && !schedule.is_constant()) {
    throw std::invalid_argument("SamplerConfig: this algorithm requires a constant schedule");
  }
  std::vector<std::string> warnings;
  if (algorithm == Algorithm::Prlmc && schedule.is_constant()) {
    const double eta = std::get<ConstantStep>(schedule.kind()).eta;
    const double eta0 = theory::find_eta0(potential.m(), potential.L(), K);
    if (eta >= eta0) {
      warnings.push_back("eta >= eta0: stationarity guarantees do not apply at this step size");
    }
  }
  return warnings;
}

void ula_update(std::vector<double>& x, const PotentialSpec& p, double eta, NoiseSource& rng,
                KernelScratch& scratch, std::int64_t* grad_evals) {
  if (!(eta > 0.0)) throw std::invalid_argument("ula_update: eta must be positive");
  scratch.resize(x.size());
  p.gradient(x, scratch.grad_x);
  if (grad_evals) ++*grad_evals;
  rng.endpoint_gaussian(scratch.noise);
  const double noise_scale = std::sqrt(2.0 * eta);
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] += -eta * scratch.grad_x[j] + noise_scale * scratch.noise[j];
  }
}

void rlmc_update(std::vector<double>& x, const PotentialSpec& p, double eta, NoiseSource& rng,
                 KernelScratch& scratch, std::int64_t* grad_evals) {
  if (!(eta > 0.0)) throw std::invalid_argument("rlmc_update: eta must be positive");
  scratch.resize(x.size());
  const double u = rng.midpoint_time();
  p.gradient(x, scratch.grad_x);
  rng.midpoint_gaussian(1, scratch.noise);
  const double mid_scale = std::sqrt(2.0 * u * eta);
  for (std::size_t j = 0; j < x.size(); ++j) {
    scratch.midpoint[j] = x[j] - u * eta * scratch.grad_x[j] + mid_scale * scratch.noise[j];
  }
  p.gradient(scratch.midpoint, scratch.grad_mid);
  if (grad_evals) *grad_evals += 2;
  rng.endpoint_gaussian(scratch.noise);
  const double noise_scale = std::sqrt(2.0 * eta);
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] += -eta * scratch.grad_mid[j] + noise_scale * scratch.noise[j];
  }
}

void prlmc_update(std::vector<double>& x, const PotentialSpec& p, double eta, int K,
                  MidpointNoiseMode mode, NoiseSource& rng, KernelScratch& scratch,
                  std::int64_t* grad_evals, int* midpoints_hit) {
  if (!(eta > 0.0)) throw std::invalid_argument("prlmc_update: eta must be positive");
  if (K < 1) throw std::invalid_argument("prlmc_update: K must be >= 1");
  scratch.resize(x.size());
  const std::size_t d = x.size();
  const double inv_k = 1.0 / static_cast<double>(K);

  p.gradient(x, scratch.grad_x);
  if (grad_evals) ++*grad_evals;

  // Correction sum eta * sum_i H_i (grad U(x) - grad U(Xh_i)), accumulated
  // into the position after the drift.  Midpoint gaussians are drawn lazily,
  // only for triggered indices.
  std::vector<double>& correction = scratch.correction;
  for (std::size_t j = 0; j < d; ++j) correction[j] = 0.0;
  bool have_driver = false;
  int hits = 0;
  std::vector<double>& mid = scratch.midpoint;
  for (int i = 0; i < K; ++i) {
    const bool hit = rng.midpoint_hit(static_cast<std::uint64_t>(i), inv_k);
    if (i == 0) {
      // Xh_0 = x: the summand is identically zero, but the Bernoulli draw
      // still counts toward the per-step midpoint tally.
      if (hit) ++hits;
      continue;
    }
    if (!hit) continue;
    ++hits;
    const double frac = static_cast<double>(i) * inv_k;
    double noise_scale;
    const double* zeta;
    if (mode == MidpointNoiseMode::SharedDriver) {
      if (!have_driver) {
        rng.midpoint_gaussian(0, scratch.driver);
        have_driver = true;
      }
      noise_scale = std::sqrt(2.0 * frac * eta);
      zeta = scratch.driver.data();
    } else {
      rng.midpoint_gaussian(static_cast<std::uint64_t>(i), scratch.noise);
      noise_scale = std::sqrt(2.0 * frac * eta);
      zeta = scratch.noise.data();
    }
    for (std::size_t j = 0; j < d; ++j) {
      mid[j] = x[j] - frac * eta * scratch.grad_x[j] + noise_scale * zeta[j];
    }
    p.gradient(mid, scratch.grad_mid);
    if (grad_evals) ++*grad_evals;
    for (std::size_t j = 0; j < d; ++j) {
      correction[j] += scratch.grad_x[j] - scratch.grad_mid[j];
    }
  }
  if (midpoints_hit) *midpoints_hit = hits;

  rng.endpoint_gaussian(scratch.noise);
  const double noise_scale = std::sqrt(2.0 * eta);
  for (std::size_t j = 0; j < d; ++j) {
    x[j] += -eta * scratch.grad_x[j] + eta * correction[j] + noise_scale * scratch.noise[j];
  }
}

namespace {

ChainState advance_state(const ChainState& state, std::vector<double> position, double eta) {
  ChainState next;
  next.position = std::move(position);
  next.step_index = state.step_index + 1;
  next.elapsed_time = state.elapsed_time + eta;
  return next;
}

}  // namespace

ChainState ula_step(const ChainState& state, const PotentialSpec& p, double eta,
                    NoiseSource& rng) {
  std::vector<double> x = state.position;
  KernelScratch scratch;
  ula_update(x, p, eta, rng, scratch);
  return advance_state(state, std::move(x), eta);
}

ChainState rlmc_step(const ChainState& state, const PotentialSpec& p, double eta,
                     NoiseSource& rng) {
  std::vector<double> x = state.position;
  KernelScratch scratch;
  rlmc_update(x, p, eta, rng, scratch);
  return advance_state(state, std::move(x), eta);
}

ChainState prlmc_step(const ChainState& state, const PotentialSpec& p, double eta, int K,
                      MidpointNoiseMode mode, NoiseSource& rng, std::int64_t* grad_evals) {
  std::vector<double> x = state.position;
  KernelScratch scratch;
  prlmc_update(x, p, eta, K, mode, rng, scratch, grad_evals);
  return advance_state(state, std::move(x), eta);
}

RunResult run_chain(const SamplerConfig& config, std::int64_t n_steps,
                    std::vector<std::int64_t> checkpoints, std::uint64_t trial_id) {
  config.validate();
  if (n_steps < 0) throw std::invalid_argument("run_chain: n_steps must be nonnegative");
  if (checkpoints.empty()) checkpoints.push_back(n_steps);
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0 || checkpoints[i] > n_steps) {
      throw std::invalid_argument("run_chain: checkpoint out of range");
    }
    if (i > 0 && checkpoints[i] < checkpoints[i - 1]) {
      throw std::invalid_argument("run_chain: checkpoints must be sorted");
    }
  }

  RunResult result;
  result.checkpoints.reserve(checkpoints.size());
  std::vector<double> x = config.initial;
  KernelScratch scratch;
  StepNoise noise(config.rng, trial_id, 0);
  std::int64_t grad_evals = 0;
  double elapsed = 0.0;
  std::size_t next_cp = 0;

  const auto record = [&](std::int64_t step) {
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == step) {
      Checkpoint cp;
      cp.step = step;
      cp.elapsed_time = elapsed;
      cp.position = x;
      cp.norm_sq = norm_sq(x);
      cp.grad_evals = grad_evals;
      result.checkpoints.push_back(std::move(cp));
      ++next_cp;
    }
  };

  record(0);
  for (std::int64_t k = 0; k < n_steps; ++k) {
    noise.rebind(trial_id, static_cast<std::uint64_t>(k));
    double step_size;
    switch (config.algorithm) {
      case Algorithm::Ula:
        step_size = std::get<ConstantStep>(config.schedule.kind()).eta;
        ula_update(x, config.potential, step_size, noise, scratch, &grad_evals);
        break;
      case Algorithm::Rlmc:
        step_size = std::get<ConstantStep>(config.schedule.kind()).eta;
        rlmc_update(x, config.potential, step_size, noise, scratch, &grad_evals);
        break;
      case Algorithm::Prlmc:
        step_size = std::get<ConstantStep>(config.schedule.kind()).eta;
        prlmc_update(x, config.potential, step_size, config.K, config.midpoint_noise_mode, noise,
                     scratch, &grad_evals);
        break;
      case Algorithm::PrlmcDecreasing:
        step_size = config.schedule.gamma(k + 1);
        prlmc_update(x, config.potential, step_size, config.K, config.midpoint_noise_mode, noise,
                     scratch, &grad_evals);
        break;
      default:
        throw std::logic_error("run_chain: unknown algorithm");
    }
    elapsed += step_size;
    if (!all_finite(x)) {
      throw DivergenceError(k + 1, static_cast<std::int64_t>(trial_id));
    }
    record(k + 1);
  }
  return result;
}

OuConditional ou_conditional_moments(double theta, double gamma) {
  if (!(theta > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("ou_conditional_moments: requires theta > 0 and gamma > 0");
  }
  const double u = theta * gamma;
  OuConditional out;
  out.decay = std::exp(-u);
  const double one_minus_e = -std::expm1(-u);      // 1 - e^{-u}
  const double cov = one_minus_e / theta;          // Cov(S_j, dB_j)
  out.rho = cov / gamma;
  if (u < 1e-3) {
    // Var(S|dB) = cov * [ (1+e^{-u})/2 - (1-e^{-u})/u ]; the bracket is
    // u^2/12 - u^3/24 + u^4/80 - ..., evaluated in series to dodge the
    // cancellation between two terms that both approach 1 - u/2.
    const double bracket = u * u / 12.0 * (1.0 - u / 2.0 + 3.0 * u * u / 20.0);
    out.var_cond = cov * bracket;
  } else {
    const double var_s = -std::expm1(-2.0 * u) / (2.0 * theta);
    out.var_cond = var_s - cov * cov / gamma;
  }
  if (!(out.var_cond > 0.0) || !std::isfinite(out.var_cond)) {
    throw std::runtime_error("coupled OU step: conditional covariance is numerically degenerate");
  }
  return out;
}

std::vector<double> ou_exact_step(std::span<const double> x, double theta, double t,
                                  NoiseSource& rng) {
  if (!(theta > 0.0) || !(t > 0.0)) {
    throw std::invalid_argument("ou_exact_step: requires theta > 0 and t > 0");
  }
  const double decay = std::exp(-theta * t);
  const double noise_sd = std::sqrt(-std::expm1(-2.0 * theta * t) / theta);
  std::vector<double> noise(x.size());
  rng.endpoint_gaussian(noise);
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = decay * x[j] + noise_sd * noise[j];
  return out;
}

namespace {

// Replays a fixed endpoint gaussian; everything else passes through.  Lets
// the coupled step drive the midpoint leg with the literal sampling kernel
// while both legs share one Brownian increment.
class FixedEndpointNoise final : public NoiseSource {
 public:
  FixedEndpointNoise(NoiseSource& inner, std::span<const double> endpoint)
      : inner_(inner), endpoint_(endpoint) {}
  void endpoint_gaussian(std::span<double> out) override {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = endpoint_[j];
  }
  void midpoint_gaussian(std::uint64_t i, std::span<double> out) override {
    inner_.midpoint_gaussian(i, out);
  }
  bool midpoint_hit(std::uint64_t i, double prob) override { return inner_.midpoint_hit(i, prob); }
  double midpoint_time() override { return inner_.midpoint_time(); }
  void bridge_gaussian(std::span<double> out) override { inner_.bridge_gaussian(out); }

 private:
  NoiseSource& inner_;
  std::span<const double> endpoint_;
};

}  // namespace

CoupledPair coupled_step_ou(std::span<const double> x, std::span<const double> y, double theta,
                            double gamma, int K, NoiseSource& rng) {
  if (x.size() != y.size()) throw std::invalid_argument("coupled_step_ou: dimension mismatch");
  if (K < 1) throw std::invalid_argument("coupled_step_ou: K must be >= 1");
  const OuConditional cond = ou_conditional_moments(theta, gamma);
  const std::size_t d = x.size();
  const PotentialSpec quad = PotentialSpec::isotropic_quadratic(theta, static_cast<int>(d));

  // Shared endpoint Brownian increment dB = sqrt(gamma) xi ~ N(0, gamma I).
  std::vector<double> xi(d);
  rng.endpoint_gaussian(xi);
  const double sqrt_gamma = std::sqrt(gamma);

  // Exact leg, conditional on dB: x' = e^{-theta gamma} x + sqrt(2) S with
  // S = rho dB + sqrt(var_cond) G, G independent of everything else.
  std::vector<double> bridge(d);
  rng.bridge_gaussian(bridge);
  const double cond_sd = std::sqrt(cond.var_cond);
  CoupledPair out;
  out.x.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double s = cond.rho * sqrt_gamma * xi[j] + cond_sd * bridge[j];
    out.x[j] = cond.decay * x[j] + std::sqrt(2.0) * s;
  }

  // Midpoint leg: the literal kernel in SharedDriver mode, with its
  // sqrt(2 gamma) endpoint draw pinned to the same xi.
  out.y.assign(y.begin(), y.end());
  FixedEndpointNoise shared(rng, xi);
  KernelScratch scratch;
  prlmc_update(out.y, quad, gamma, K, MidpointNoiseMode::SharedDriver, shared, scratch);
  return out;
}

}  // namespace prlmc
