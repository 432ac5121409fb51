// Step-size sequences gamma_n, accumulated times t_n and schedule hypotheses.

#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace prlmc {

struct ConstantStep {
  double eta;
};

// gamma_n = c * (n + offset)^(-alpha), alpha in (0, 1].  The integer offset
// shifts the start of the sequence so the first step can be capped without
// changing the decay exponent or the limiting ratio statistic.
struct PolynomialStep {
  double c;
  double alpha;
  std::int64_t offset = 0;
};

using ScheduleKind = std::variant<ConstantStep, PolynomialStep>;

class StepSchedule {
 public:
  static StepSchedule constant(double eta);
  static StepSchedule polynomial(double c, double alpha, std::int64_t offset = 0);

  /// gamma_n for n >= 1.
  double gamma(std::int64_t n) const;

  /// t_n = sum_{i=1}^{n} gamma_i, with t_0 = 0.  Accumulated left to right,
  /// matching the accumulation order used by the chain runners.
  double time_at(std::int64_t n) const;

  /// Analytic limsup of (gamma_n - gamma_{n+1}) / gamma_{n+1}^2:
  /// 0 for constant steps and alpha < 1, 1/c for alpha == 1.
  double omega() const;

  /// Violated hypotheses among {2*omega >= m, gamma_1 > upper}; empty means
  /// the schedule satisfies both with first-step cap `upper`.
  std::vector<std::string> validate(double m, double upper) const;

  bool is_constant() const { return std::holds_alternative<ConstantStep>(kind_); }
  const ScheduleKind& kind() const { return kind_; }

 private:
  explicit StepSchedule(ScheduleKind kind) : kind_(std::move(kind)) {}
  ScheduleKind kind_;
};

}  // namespace prlmc
