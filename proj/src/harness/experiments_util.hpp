// Shared machinery for the experiment implementations.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prlmc/harness/config.hpp"
#include "prlmc/harness/report.hpp"
#include "prlmc/metrics.hpp"
#include "prlmc/rng.hpp"

namespace prlmc {
namespace harness {

// Sub-policy tags for auxiliary sample spaces.
inline constexpr std::uint64_t kTagReference = 0x5245464231ull;   // exact-target batches
inline constexpr std::uint64_t kTagFloor = 0x464c4f4f52ull;       // noise-floor replicates
inline constexpr std::uint64_t kTagBootstrap = 0x424f4f5453ull;   // bootstrap index draws

// n exact draws from the stationary law of the isotropic quadratic target,
// N(0, I/theta), one derived stream per sample.
std::vector<double> exact_gaussian_batch(const RngPolicy& policy, double theta, std::int64_t n);

struct W2Estimate {
  double value = 0.0;
  double se = 0.0;
};

// 1-D empirical W2 between `samples` and an equal-size exact N(0, 1/theta)
// batch, with a bootstrap standard error.  `cluster` gives the number of
// consecutive samples that came from one chain; bootstrap resampling happens
// at cluster level so intra-chain correlation does not shrink the SE.
W2Estimate w2_vs_exact(const RngPolicy& policy, std::vector<double> samples, double theta,
                       std::int64_t cluster, int bootstrap_rounds);

// Mean empirical W2 between two independent exact batches of size n: the
// resolution floor of the estimator at this sample size.
double w2_noise_floor(const RngPolicy& policy, double theta, std::int64_t n, int replicates);

// One-sided bound check with the estimator floor discounted:
// pass iff max(estimate - floor_allowance - 3 se, 0) <= bound.
VerdictRow bound_row(std::string id, std::string bound_id, double estimate, double se,
                     double floor_allowance, double bound, std::string detail = "");

// Plain OLS of y on x (not log-log).
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);

// Embeds the full set of closed-form constants for the configured
// (potential, K, eta) into the report summary under "theory_bounds".
// Constant-step configs get every field; decreasing schedules get the
// step-independent ones.
void attach_theory_bounds(ExperimentReport& report, const ExperimentConfig& config);

}  // namespace harness
}  // namespace prlmc
