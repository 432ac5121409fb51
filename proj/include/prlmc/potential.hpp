// Target potentials U with certified smoothness/convexity constants.
//
// Every potential here is minimized at the origin with gradient zero there,
// is m-strongly convex and L-gradient-Lipschitz, and carries a bound l_tilde
// on the operator norm of its third derivative.  The quadratics have
// l_tilde = 0 and an exactly solvable diffusion; the quadratic-plus-log-cosh
// family exercises the third-derivative terms.

#pragma once

#include <span>
#include <variant>
#include <vector>

namespace prlmc {

struct IsotropicQuadratic {
  double theta;  // U(x) = (theta/2)|x|^2
};

struct AnisotropicQuadratic {
  std::vector<double> spectrum;  // U(x) = (1/2) sum_i spectrum[i] x_i^2
};

struct QuadraticLogCosh {
  double theta;  // U(x) = (theta/2)|x|^2 + alpha * sum_i log cosh(x_i)
  double alpha;
};

using PotentialKind = std::variant<IsotropicQuadratic, AnisotropicQuadratic, QuadraticLogCosh>;

class PotentialSpec {
 public:
  static PotentialSpec isotropic_quadratic(double theta, int dimension);
  static PotentialSpec anisotropic_quadratic(std::vector<double> spectrum);
  static PotentialSpec quadratic_log_cosh(double theta, double alpha, int dimension);

  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  std::vector<double> gradient(std::span<const double> x) const;

  int dimension() const { return dimension_; }
  double m() const { return m_; }
  double L() const { return L_; }
  double l_tilde() const { return l_tilde_; }
  const PotentialKind& kind() const { return kind_; }

  bool is_isotropic_quadratic() const {
    return std::holds_alternative<IsotropicQuadratic>(kind_);
  }

 private:
  PotentialSpec(PotentialKind kind, int dimension, double m, double L, double l_tilde);

  PotentialKind kind_;
  int dimension_;
  double m_;
  double L_;
  double l_tilde_;
};

}  // namespace prlmc
