#include "prlmc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prlmc {

namespace {

// log cosh(x) without overflow for large |x|.
double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

void check_dim(std::span<const double> x, int d, const char* what) {
  if (static_cast<int>(x.size()) != d) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

PotentialSpec::PotentialSpec(PotentialKind kind, int dimension, double m, double L, double l_tilde)
    : kind_(std::move(kind)), dimension_(dimension), m_(m), L_(L), l_tilde_(l_tilde) {
  if (dimension_ < 1) throw std::invalid_argument("PotentialSpec: dimension must be positive");
  if (!(m_ > 0.0) || !(L_ >= m_) || !(l_tilde_ >= 0.0)) {
    throw std::invalid_argument("PotentialSpec: requires 0 < m <= L and l_tilde >= 0");
  }
}

PotentialSpec PotentialSpec::isotropic_quadratic(double theta, int dimension) {
  if (!(theta > 0.0)) throw std::invalid_argument("isotropic_quadratic: theta must be positive");
  return PotentialSpec(IsotropicQuadratic{theta}, dimension, theta, theta, 0.0);
}

PotentialSpec PotentialSpec::anisotropic_quadratic(std::vector<double> spectrum) {
  if (spectrum.empty()) throw std::invalid_argument("anisotropic_quadratic: empty spectrum");
  for (double s : spectrum) {
    if (!(s > 0.0)) throw std::invalid_argument("anisotropic_quadratic: spectrum must be positive");
  }
  const auto [mn, mx] = std::minmax_element(spectrum.begin(), spectrum.end());
  const double m = *mn;
  const double L = *mx;
  const int d = static_cast<int>(spectrum.size());
  return PotentialSpec(AnisotropicQuadratic{std::move(spectrum)}, d, m, L, 0.0);
}

PotentialSpec PotentialSpec::quadratic_log_cosh(double theta, double alpha, int dimension) {
  if (!(theta > 0.0)) throw std::invalid_argument("quadratic_log_cosh: theta must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("quadratic_log_cosh: alpha must be nonnegative");
  // alpha bounds the per-coordinate third derivative |alpha * (tanh)''|, whose
  // true maximum is 4 alpha / (3 sqrt(3)) ~ 0.77 alpha.
  return PotentialSpec(QuadraticLogCosh{theta, alpha}, dimension, theta, theta + alpha, alpha);
}

double PotentialSpec::value(std::span<const double> x) const {
  check_dim(x, dimension_, "value");
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IsotropicQuadratic>) {
          double s = 0.0;
          for (double v : x) s += v * v;
          return 0.5 * k.theta * s;
        } else if constexpr (std::is_same_v<T, AnisotropicQuadratic>) {
          double s = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) s += k.spectrum[i] * x[i] * x[i];
          return 0.5 * s;
        } else {
          double s = 0.0;
          double lc = 0.0;
          for (double v : x) {
            s += v * v;
            lc += log_cosh(v);
          }
          return 0.5 * k.theta * s + k.alpha * lc;
        }
      },
      kind_);
}

void PotentialSpec::gradient(std::span<const double> x, std::span<double> out) const {
  check_dim(x, dimension_, "gradient");
  check_dim(out, dimension_, "gradient output");
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IsotropicQuadratic>) {
          for (std::size_t i = 0; i < x.size(); ++i) out[i] = k.theta * x[i];
        } else if constexpr (std::is_same_v<T, AnisotropicQuadratic>) {
          for (std::size_t i = 0; i < x.size(); ++i) out[i] = k.spectrum[i] * x[i];
        } else {
          for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = k.theta * x[i] + k.alpha * std::tanh(x[i]);
          }
        }
      },
      kind_);
}

std::vector<double> PotentialSpec::gradient(std::span<const double> x) const {
  std::vector<double> g(x.size());
  gradient(x, g);
  return g;
}

}  // namespace prlmc
