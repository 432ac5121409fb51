// Sampling kernels and chain runners.
//
// One step of the K-midpoint chain with step size eta from position x:
//   draws H_i ~ Bernoulli(1/K) for i = 0..K-1,
//   for each triggered i >= 1 forms the midpoint
//     Xh_i = x - (i eta / K) grad U(x) + sqrt(2 i eta / K) * zeta_i,
//   and moves to
//     x' = x - eta grad U(x) + eta sum_i H_i (grad U(x) - grad U(Xh_i))
//          + sqrt(2 eta) * xi.
// The i = 0 summand vanishes identically (Xh_0 = x), so that index is
// skipped and costs no gradient.  zeta_i is a fresh per-index gaussian in
// IndependentPerIndex mode, or sqrt(i/K)-scaled shares of one driver
// gaussian per step in SharedDriver mode; both give the same per-midpoint
// marginal law.  Gradient work per step is 1 plus the number of triggered
// midpoints with i >= 1.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "prlmc/potential.hpp"
#include "prlmc/rng.hpp"
#include "prlmc/schedule.hpp"

namespace prlmc {

enum class Algorithm { Ula, Rlmc, Prlmc, PrlmcDecreasing };

enum class MidpointNoiseMode { IndependentPerIndex, SharedDriver };

struct ChainState {
  std::vector<double> position;
  std::int64_t step_index = 0;
  double elapsed_time = 0.0;
};

struct SamplerConfig {
  Algorithm algorithm = Algorithm::Prlmc;
  int K = 1;  // midpoint count, >= 1 (ignored by ULA/RLMC)
  PotentialSpec potential;
  StepSchedule schedule;
  std::vector<double> initial;
  MidpointNoiseMode midpoint_noise_mode = MidpointNoiseMode::IndependentPerIndex;
  RngPolicy rng;

  // Throws on hard violations (shape mismatch, non-constant schedule for the
  // fixed-step algorithms); returns soft warnings (e.g. eta >= eta0, which
  // voids the stationarity guarantees but is a legitimate run).
  std::vector<std::string> validate() const;
};

// Raised when a chain position stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t step, std::int64_t trial)
      : std::runtime_error("chain diverged at step " + std::to_string(step) + " (trial " +
                           std::to_string(trial) + ")"),
        step(step),
        trial(trial) {}
  std::int64_t step;
  std::int64_t trial;
};

// Scratch buffers reused across steps; sized to the potential's dimension.
struct KernelScratch {
  std::vector<double> grad_x, noise, midpoint, grad_mid, driver, correction;
  void resize(std::size_t d) {
    if (grad_x.size() == d) return;
    grad_x.resize(d);
    noise.resize(d);
    midpoint.resize(d);
    grad_mid.resize(d);
    driver.resize(d);
    correction.resize(d);
  }
};

// In-place one-step updates.  grad_evals, when non-null, is incremented by
// the number of gradient evaluations performed.
void ula_update(std::vector<double>& x, const PotentialSpec& p, double eta, NoiseSource& rng,
                KernelScratch& scratch, std::int64_t* grad_evals = nullptr);
void rlmc_update(std::vector<double>& x, const PotentialSpec& p, double eta, NoiseSource& rng,
                 KernelScratch& scratch, std::int64_t* grad_evals = nullptr);
void prlmc_update(std::vector<double>& x, const PotentialSpec& p, double eta, int K,
                  MidpointNoiseMode mode, NoiseSource& rng, KernelScratch& scratch,
                  std::int64_t* grad_evals = nullptr, int* midpoints_hit = nullptr);

// Spec-shaped single-step operations.
ChainState ula_step(const ChainState& state, const PotentialSpec& p, double eta, NoiseSource& rng);
ChainState rlmc_step(const ChainState& state, const PotentialSpec& p, double eta, NoiseSource& rng);
ChainState prlmc_step(const ChainState& state, const PotentialSpec& p, double eta, int K,
                      MidpointNoiseMode mode, NoiseSource& rng,
                      std::int64_t* grad_evals = nullptr);

struct Checkpoint {
  std::int64_t step = 0;
  double elapsed_time = 0.0;
  std::vector<double> position;
  double norm_sq = 0.0;
  std::int64_t grad_evals = 0;
};

struct RunResult {
  std::vector<Checkpoint> checkpoints;
};

/// Runs the configured chain for n_steps, recording every checkpoint listed
/// (sorted, all <= n_steps; empty defaults to {n_steps}).  Throws
/// DivergenceError if the position leaves the finite range.
RunResult run_chain(const SamplerConfig& config, std::int64_t n_steps,
                    std::vector<std::int64_t> checkpoints, std::uint64_t trial_id = 0);

/// Exact transition of the Ornstein-Uhlenbeck dynamics for the isotropic
/// quadratic potential: x' = e^{-theta t} x + sqrt((1 - e^{-2 theta t})/theta) * xi.
std::vector<double> ou_exact_step(std::span<const double> x, double theta, double t,
                                  NoiseSource& rng);

struct CoupledPair {
  std::vector<double> x;  // exact diffusion leg
  std::vector<double> y;  // discretized leg
};

/// One synchronously coupled step on the isotropic quadratic target: both
/// legs share the endpoint Brownian increment; the exact leg receives its
/// conditional remainder noise from an independent stream, and the midpoint
/// leg runs in SharedDriver mode with its own driver.  Marginally the x-leg
/// is ou_exact_step and the y-leg is prlmc_update.
CoupledPair coupled_step_ou(std::span<const double> x, std::span<const double> y, double theta,
                            double gamma, int K, NoiseSource& rng);

/// Conditional second-order structure of the exact OU transition given the
/// endpoint Brownian increment; exposed for tests and the coupling kernel.
struct OuConditional {
  double decay;     // e^{-theta gamma}
  double rho;       // Cov(S, dB) / Var(dB) = (1 - e^{-theta gamma}) / (theta gamma)
  double var_cond;  // Var(S | dB), always > 0 for theta gamma > 0
};
OuConditional ou_conditional_moments(double theta, double gamma);

}  // namespace prlmc
