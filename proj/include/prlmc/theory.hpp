// Closed-form constants and bounds for the midpoint-randomized Langevin
// chains: the contraction rate kappa, the Lyapunov drift constants, the
// largest admissible constant step, the stationary second-moment bound, both
// stationary-bias bounds in 2-Wasserstein distance, the decreasing-step decay
// bound, and the midpoint-count law.  These are the reference side of every
// bound-verification experiment.

#pragma once

#include <cstdint>
#include <vector>

#include "prlmc/schedule.hpp"

namespace prlmc {
namespace theory {

/// kappa = 2mL/(m+L); lies in [m, 2m) for 0 < m <= L.
double kappa(double m, double L);

struct DriftConstants {
  double lambda;  // one-step contraction factor on V(x) = 1 + |x|^2
  double b;       // drift offset, active on the ball D_eta
  double radius;  // radius sqrt(b / (m eta)) of D_eta
};

/// lambda(eta) = 1 - m eta + (1 + 3 L^2) eta^2 + 4 (2 - 1/K) L^4 eta^4,
/// b(eta) = [m + 2d + L^2 (1 - 1/K)] eta + 4 d L^2 (2 - 1/K) eta^3
///          + 4 (2 - 1/K) eta^4.
DriftConstants lyapunov_constants(double m, double L, int K, int d, double eta);

/// Largest eta in (0,1) such that both lambda(eta) < 1 and the second-moment
/// contraction 1 - 2 m eta + (1 + 3 L^2) eta^2 + 4 (2 - 1/K) L^4 eta^4
/// <= 1 - m eta hold throughout (0, eta].  Both reduce to
/// (1 + 3 L^2) eta + 4 (2 - 1/K) L^4 eta^3 <= m, solved by bisection to 1e-12.
double find_eta0(double m, double L, int K);

/// (d/m) {2 + 4 eta^2 L^2 (2 - 1/K) + L^2 (1 - 1/K)}, an upper bound on the
/// stationary second moment of the constant-step chain for eta < eta0.
double stationary_moment_bound(double m, double L, int K, int d, double eta);

/// O(sqrt(eta)) stationary-bias bound:
/// (L/m) sqrt(eta) [ (2d + 4 eta^2 L d + 8 L^2 eta^2 d)^{1/2}
///                 + sqrt(4 - 2/K) (eta L^2 pi_eta_m2 / 3 + d)^{1/2} ].
/// The caller supplies pi_eta_m2, either the bound above or an exact value.
double w2_bias_bound_sqrt(double m, double L, int K, int d, double eta, double pi_eta_m2);

/// Sharp O(eta^2) bound on the squared 2-Wasserstein stationary bias:
/// 2 kappa^{-1} d eta^2 { L^2 [10 - 4/K + L^2 eta^2 / 6 + 2 kappa^{-1} L^2 eta]
///   + 6 kappa^{-1} d l_tilde^2
///   + ({2 + 4 eta^2 L^2 (2 - 1/K) + L^2 (1 - 1/K)} / m)
///       L^4 [(8 - 4/K) eta + 3 kappa^{-1}]
///   + L^4 (eta + 3 kappa^{-1}) / m }.
double w2_bias_bound_sharp(double m, double L, double l_tilde, int K, int d, double eta);

struct DecayBound {
  double u1;  // 2 prod_{k=1}^{n} (1 - kappa gamma_k / 2)
  double u2;  // weighted remainder sum, see below
};

/// Decreasing-step decay bound on the squared 2-Wasserstein distance after n
/// steps: W2^2 <= u1 (|x|^2 + d/m) + u2, with
/// u2 = sum_{i=1}^{n} gamma_i^3 { L^2 d [10 - 4/K + L^2 gamma_i^2 / 6
///        + 2 kappa^{-1} L^2 gamma_i] + 6 kappa^{-1} d^2 l_tilde^2
///        + c_moment L^4 [(8 - 4/K) gamma_i + 3 kappa^{-1}]
///        + d L^4 (gamma_i + 3 kappa^{-1}) / m } prod_{k=i+1}^{n} (1 - kappa gamma_k / 2).
/// c_moment stands in for the non-explicit uniform bound on the chain's
/// second moment; callers supply a measured or exact value.  Requires
/// 1 - kappa gamma_k / 2 > 0 for every k <= n.  The u1 product accumulates in
/// log space once n exceeds 1e4.
DecayBound wasserstein_decay_bound(const StepSchedule& schedule, double m, double L,
                                   double l_tilde, int K, int d, double x0_norm2,
                                   double c_moment, std::int64_t n);

/// Same bound evaluated at several step counts in one forward pass.
std::vector<DecayBound> wasserstein_decay_bound_at(const StepSchedule& schedule, double m,
                                                   double L, double l_tilde, int K, int d,
                                                   double x0_norm2, double c_moment,
                                                   const std::vector<std::int64_t>& ns);

/// P(count = n) for the per-step triggered-midpoint count:
/// C(K,n) (1/K)^n (1 - 1/K)^{K-n}; tends to exp(-1)/n! as K grows.
double poisson_midpoint_pmf(int K, int n);

/// Total variation distance between Binomial(K, 1/K) and Poisson(1),
/// by direct summation of the two mass functions.
double binomial_poisson_tv(int K);

/// |x|^2 e^{-2mt} + (d/m)(1 - e^{-2mt}): second-moment bound for the
/// continuous-time dynamics, an equality in the isotropic quadratic case.
double langevin_moment_bound(double x_norm2, double m, int d, double t);

/// All constant-step bounds for one configuration, for report embedding.
struct TheoryBounds {
  double m = 0.0, L = 0.0, l_tilde = 0.0;
  int K = 1, d = 1;
  double eta = 0.0;
  double kappa = 0.0;
  double lambda_eta = 0.0;
  double b_eta = 0.0;
  double d_eta_radius = 0.0;
  double eta0 = 0.0;
  double moment_bound = 0.0;
  double w2_sqrt_bound = 0.0;   // on W2, using moment_bound for pi_eta(|x|^2)
  double w2_sharp_bound = 0.0;  // on W2^2
};

TheoryBounds evaluate_bounds(double m, double L, double l_tilde, int K, int d, double eta);

}  // namespace theory
}  // namespace prlmc
