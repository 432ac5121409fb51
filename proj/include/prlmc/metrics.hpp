// Distance estimators, exact moment recursions for quadratic targets, and
// rate-fitting utilities.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace prlmc {

// A batch of n samples in R^d, stored row-major.  Entries must be finite.
class SampleBatch {
 public:
  SampleBatch(int dimension, std::vector<double> data);

  static SampleBatch from_scalars(std::vector<double> values);

  int dimension() const { return d_; }
  std::int64_t count() const { return n_; }
  std::span<const double> row(std::int64_t i) const {
    return {data_.data() + i * d_, static_cast<std::size_t>(d_)};
  }
  std::span<const double> flat() const { return data_; }

  // Flat binary layout: uint64 d, uint64 n (little endian), then n*d
  // little-endian float64 samples.
  void save_binary(const std::string& path) const;
  static SampleBatch load_binary(const std::string& path);

  void save_csv(const std::string& path) const;

 private:
  int d_;
  std::int64_t n_;
  std::vector<double> data_;
};

/// Exact 2-Wasserstein distance between two equal-size 1-D empirical
/// measures, realized by the sorted (quantile) coupling.
double w2_1d(const SampleBatch& a, const SampleBatch& b);

/// Closed-form W2 between centered isotropic Gaussians with standard
/// deviations sigma1, sigma2 in dimension d: sqrt(d) |sigma1 - sigma2|.
double w2_gaussian_isotropic(double sigma1, double sigma2, int d);

/// Exact empirical W2 in any dimension via minimum-cost perfect matching on
/// squared Euclidean costs.  O(n^3); restricted to n <= 256.
double w2_assignment(const SampleBatch& a, const SampleBatch& b);

/// Histogram estimate of the total variation distance between two 1-D
/// batches: half the L1 distance between bin frequencies on [lo, hi] with
/// the given number of bins.  Mass outside the range is folded into the
/// nearest edge bin so disjointly supported batches register distance 1.
double tv_1d_histogram(const SampleBatch& a, const SampleBatch& b, int bins, double lo, double hi);

// Exact second-moment recursion of the K-midpoint chain on the isotropic
// quadratic target with gradient theta*x and independent per-index midpoint
// noise.  One step multiplies the state by the random scalar
//   A = 1 - eta theta + (eta^2 theta^2 / K) sum_i H_i i,
// and adds independent noise of total variance v per step, so
//   E|X_{k+1}|^2 = E[A^2] E|X_k|^2 + v.
struct MomentRecursion {
  double mean_factor = 0.0;      // E[A]
  double second_factor = 0.0;    // E[A^2]
  double noise_variance = 0.0;   // v
  double fixed_point = 0.0;      // v / (1 - E[A^2])
  std::vector<double> trajectory;  // E|X_k|^2 for k = 0..n_steps
};

/// Requires E[A^2] < 1 (throws otherwise: step size too large).
MomentRecursion quadratic_prlmc_moment_oracle(double theta, double eta, int K, int d,
                                              double x0_norm2, std::int64_t n_steps);

/// Same recursion driven by a decreasing step sequence; returns E|X_k|^2 for
/// k = 0..n_steps and the running supremum, used as the c_moment stand-in.
struct DecreasingMomentTrace {
  std::vector<double> trajectory;
  double supremum = 0.0;
};
DecreasingMomentTrace quadratic_prlmc_moment_trace(double theta, const class StepSchedule& schedule,
                                                   int K, int d, double x0_norm2,
                                                   std::int64_t n_steps);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares of log(y) on log(x); requires >= 3 positive points.
LogLogFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace prlmc
