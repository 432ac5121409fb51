// Small statistics helpers shared by metrics, experiments and tests.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace prlmc {

inline double norm_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

struct MeanVar {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased

  double se_mean() const { return n > 1 ? std::sqrt(variance / static_cast<double>(n)) : 0.0; }
  // Normal-theory standard error of the sample variance.
  double se_variance() const {
    return n > 1 ? variance * std::sqrt(2.0 / static_cast<double>(n - 1)) : 0.0;
  }
};

MeanVar mean_var(std::span<const double> xs);

// Accumulator form, for streaming sums over trial blocks.
struct MomentAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  void merge(const MomentAccumulator& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
  }
  MeanVar finish() const;
};

// Regularized incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a), a > 0, x >= 0.
double gamma_q(double a, double x);

// Upper-tail p-value of a chi-square statistic with `dof` degrees of freedom.
inline double chi_square_pvalue(double statistic, double dof) {
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace prlmc
