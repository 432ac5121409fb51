#include "prlmc/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace prlmc {

StepSchedule StepSchedule::constant(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("StepSchedule: eta must be positive");
  return StepSchedule(ConstantStep{eta});
}

StepSchedule StepSchedule::polynomial(double c, double alpha, std::int64_t offset) {
  if (!(c > 0.0)) throw std::invalid_argument("StepSchedule: c must be positive");
  if (!(alpha > 0.0) || alpha > 1.0) {
    // alpha <= 1 keeps sum gamma_n divergent; alpha > 0 keeps gamma_n -> 0.
    throw std::invalid_argument("StepSchedule: alpha must lie in (0, 1]");
  }
  if (offset < 0) throw std::invalid_argument("StepSchedule: offset must be nonnegative");
  return StepSchedule(PolynomialStep{c, alpha, offset});
}

double StepSchedule::gamma(std::int64_t n) const {
  if (n < 1) throw std::invalid_argument("gamma: step index must be >= 1");
  if (const auto* c = std::get_if<ConstantStep>(&kind_)) return c->eta;
  const auto& p = std::get<PolynomialStep>(kind_);
  return p.c * std::pow(static_cast<double>(n + p.offset), -p.alpha);
}

double StepSchedule::time_at(std::int64_t n) const {
  if (n < 0) throw std::invalid_argument("time_at: step index must be >= 0");
  if (const auto* c = std::get_if<ConstantStep>(&kind_)) {
    return static_cast<double>(n) * c->eta;
  }
  double t = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) t += gamma(i);
  return t;
}

double StepSchedule::omega() const {
  if (std::holds_alternative<ConstantStep>(kind_)) return 0.0;
  const auto& p = std::get<PolynomialStep>(kind_);
  return p.alpha < 1.0 ? 0.0 : 1.0 / p.c;
}

std::vector<std::string> StepSchedule::validate(double m, double upper) const {
  if (!(m > 0.0) || !(upper > 0.0)) {
    throw std::invalid_argument("validate: m and upper must be positive");
  }
  std::vector<std::string> violations;
  if (2.0 * omega() >= m) {
    violations.push_back("2*omega >= m (step ratio statistic too large for the decay rate)");
  }
  if (gamma(1) > upper) {
    violations.push_back("gamma_1 exceeds the first-step cap");
  }
  return violations;
}

}  // namespace prlmc
