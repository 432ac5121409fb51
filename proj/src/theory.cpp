#include "prlmc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prlmc {
namespace theory {

namespace {

void require_m_le_L(double m, double L) {
  if (!(m > 0.0) || !(L >= m)) throw std::invalid_argument("requires 0 < m <= L");
}

void require_K(int K) {
  if (K < 1) throw std::invalid_argument("requires K >= 1");
}

}  // namespace

double kappa(double m, double L) {
  require_m_le_L(m, L);
  return 2.0 * m * L / (m + L);
}

DriftConstants lyapunov_constants(double m, double L, int K, int d, double eta) {
  require_m_le_L(m, L);
  require_K(K);
  if (!(eta > 0.0)) throw std::invalid_argument("lyapunov_constants: eta must be positive");
  const double invK = 1.0 / static_cast<double>(K);
  const double L2 = L * L;
  const double L4 = L2 * L2;
  DriftConstants out;
  out.lambda = 1.0 - m * eta + (1.0 + 3.0 * L2) * eta * eta +
               4.0 * (2.0 - invK) * L4 * eta * eta * eta * eta;
  out.b = (m + 2.0 * d + L2 * (1.0 - invK)) * eta +
          4.0 * d * L2 * (2.0 - invK) * eta * eta * eta +
          4.0 * (2.0 - invK) * eta * eta * eta * eta;
  out.radius = std::sqrt(out.b / (m * eta));
  return out;
}

double find_eta0(double m, double L, int K) {
  require_m_le_L(m, L);
  require_K(K);
  const double invK = 1.0 / static_cast<double>(K);
  const double L2 = L * L;
  const double L4 = L2 * L2;
  // g(eta) = (1 + 3L^2) eta + 4 (2 - 1/K) L^4 eta^3 is strictly increasing and
  // g(1) > m always, so the condition g(eta) <= m has a unique crossing in (0,1).
  const auto g = [&](double eta) {
    return (1.0 + 3.0 * L2) * eta + 4.0 * (2.0 - invK) * L4 * eta * eta * eta;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) <= m) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double stationary_moment_bound(double m, double L, int K, int d, double eta) {
  require_m_le_L(m, L);
  require_K(K);
  const double invK = 1.0 / static_cast<double>(K);
  return (static_cast<double>(d) / m) *
         (2.0 + 4.0 * eta * eta * L * L * (2.0 - invK) + L * L * (1.0 - invK));
}

double w2_bias_bound_sqrt(double m, double L, int K, int d, double eta, double pi_eta_m2) {
  require_m_le_L(m, L);
  require_K(K);
  if (!(eta > 0.0)) throw std::invalid_argument("w2_bias_bound_sqrt: eta must be positive");
  if (!(pi_eta_m2 >= 0.0)) throw std::invalid_argument("w2_bias_bound_sqrt: pi_eta_m2 < 0");
  const double invK = 1.0 / static_cast<double>(K);
  const double dd = static_cast<double>(d);
  const double first = std::sqrt(2.0 * dd + 4.0 * eta * eta * L * dd + 8.0 * L * L * eta * eta * dd);
  const double second =
      std::sqrt(4.0 - 2.0 * invK) * std::sqrt(eta * L * L * pi_eta_m2 / 3.0 + dd);
  return (L / m) * std::sqrt(eta) * (first + second);
}

double w2_bias_bound_sharp(double m, double L, double l_tilde, int K, int d, double eta) {
  require_m_le_L(m, L);
  require_K(K);
  if (!(eta > 0.0)) throw std::invalid_argument("w2_bias_bound_sharp: eta must be positive");
  const double invK = 1.0 / static_cast<double>(K);
  const double kap = kappa(m, L);
  const double L2 = L * L;
  const double L4 = L2 * L2;
  const double dd = static_cast<double>(d);
  const double moment_brace = 2.0 + 4.0 * eta * eta * L2 * (2.0 - invK) + L2 * (1.0 - invK);
  const double brace = L2 * (10.0 - 4.0 * invK + L2 * eta * eta / 6.0 + 2.0 / kap * L2 * eta) +
                       6.0 / kap * dd * l_tilde * l_tilde +
                       (moment_brace / m) * L4 * ((8.0 - 4.0 * invK) * eta + 3.0 / kap) +
                       L4 * (eta + 3.0 / kap) / m;
  return 2.0 / kap * dd * eta * eta * brace;
}

std::vector<DecayBound> wasserstein_decay_bound_at(const StepSchedule& schedule, double m,
                                                   double L, double l_tilde, int K, int d,
                                                   double x0_norm2, double c_moment,
                                                   const std::vector<std::int64_t>& ns) {
  require_m_le_L(m, L);
  require_K(K);
  if (!(x0_norm2 >= 0.0) || !(c_moment > 0.0)) {
    throw std::invalid_argument("wasserstein_decay_bound: bad moment inputs");
  }
  for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
    if (ns[i + 1] < ns[i]) throw std::invalid_argument("wasserstein_decay_bound: ns not sorted");
  }
  if (!ns.empty() && ns.front() < 1) {
    throw std::invalid_argument("wasserstein_decay_bound: n must be >= 1");
  }
  (void)x0_norm2;  // the caller combines u1 with (|x|^2 + d/m)

  const double invK = 1.0 / static_cast<double>(K);
  const double kap = kappa(m, L);
  const double L2 = L * L;
  const double L4 = L2 * L2;
  const double dd = static_cast<double>(d);
  const std::int64_t n_max = ns.empty() ? 0 : ns.back();
  const bool log_space = n_max > 10000;

  std::vector<DecayBound> out;
  out.reserve(ns.size());
  double log_prod = 0.0;  // log prod (1 - kappa gamma_k / 2)
  double prod = 1.0;
  double u2 = 0.0;
  std::size_t next = 0;
  for (std::int64_t k = 1; k <= n_max && next < ns.size(); ++k) {
    const double gk = schedule.gamma(k);
    const double factor = 1.0 - kap * gk / 2.0;
    if (!(factor > 0.0)) {
      throw std::invalid_argument("wasserstein_decay_bound: schedule too aggressive, 1 - kappa*gamma/2 <= 0");
    }
    const double brace =
        L2 * dd * (10.0 - 4.0 * invK + L2 * gk * gk / 6.0 + 2.0 / kap * L2 * gk) +
        6.0 / kap * dd * dd * l_tilde * l_tilde +
        c_moment * L4 * ((8.0 - 4.0 * invK) * gk + 3.0 / kap) +
        dd * L4 * (gk + 3.0 / kap) / m;
    u2 = u2 * factor + gk * gk * gk * brace;
    if (log_space) {
      log_prod += std::log(factor);
    } else {
      prod *= factor;
    }
    while (next < ns.size() && ns[next] == k) {
      DecayBound b;
      b.u1 = 2.0 * (log_space ? std::exp(log_prod) : prod);
      b.u2 = u2;
      out.push_back(b);
      ++next;
    }
  }
  return out;
}

DecayBound wasserstein_decay_bound(const StepSchedule& schedule, double m, double L,
                                   double l_tilde, int K, int d, double x0_norm2,
                                   double c_moment, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("wasserstein_decay_bound: n must be >= 1");
  return wasserstein_decay_bound_at(schedule, m, L, l_tilde, K, d, x0_norm2, c_moment, {n})
      .front();
}

double poisson_midpoint_pmf(int K, int n) {
  require_K(K);
  if (n < 0 || n > K) throw std::invalid_argument("poisson_midpoint_pmf: requires 0 <= n <= K");
  const double kd = static_cast<double>(K);
  const double log_choose = std::lgamma(kd + 1.0) - std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(kd - static_cast<double>(n) + 1.0);
  const double log_pmf = log_choose - static_cast<double>(n) * std::log(kd) +
                         (kd - static_cast<double>(n)) * std::log1p(-1.0 / kd);
  // log1p(-1/K) is -inf for K == 1; the n == K term is then exactly 1.
  if (K == 1) return n == 1 ? 1.0 : 0.0;
  return std::exp(log_pmf);
}

double binomial_poisson_tv(int K) {
  require_K(K);
  // Sum |binomial - poisson| over n <= min(K, 50), then add both tails; the
  // tail masses are astronomically small for the K used here but cost nothing.
  const int n_cut = std::min(K, 50);
  double acc = 0.0;
  double binom_head = 0.0;
  double pois_head = 0.0;
  double pois_pmf = std::exp(-1.0);  // n = 0
  for (int n = 0; n <= n_cut; ++n) {
    const double b = poisson_midpoint_pmf(K, n);
    acc += std::fabs(b - pois_pmf);
    binom_head += b;
    pois_head += pois_pmf;
    pois_pmf /= static_cast<double>(n + 1);
  }
  acc += std::max(0.0, 1.0 - binom_head) + std::max(0.0, 1.0 - pois_head);
  return 0.5 * acc;
}

double langevin_moment_bound(double x_norm2, double m, int d, double t) {
  if (!(m > 0.0)) throw std::invalid_argument("langevin_moment_bound: m must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("langevin_moment_bound: t must be nonnegative");
  if (!(x_norm2 >= 0.0)) throw std::invalid_argument("langevin_moment_bound: |x|^2 < 0");
  const double decay = std::exp(-2.0 * m * t);
  return x_norm2 * decay + (static_cast<double>(d) / m) * (1.0 - decay);
}

TheoryBounds evaluate_bounds(double m, double L, double l_tilde, int K, int d, double eta) {
  TheoryBounds tb;
  tb.m = m;
  tb.L = L;
  tb.l_tilde = l_tilde;
  tb.K = K;
  tb.d = d;
  tb.eta = eta;
  tb.kappa = kappa(m, L);
  const DriftConstants drift = lyapunov_constants(m, L, K, d, eta);
  tb.lambda_eta = drift.lambda;
  tb.b_eta = drift.b;
  tb.d_eta_radius = drift.radius;
  tb.eta0 = find_eta0(m, L, K);
  tb.moment_bound = stationary_moment_bound(m, L, K, d, eta);
  tb.w2_sqrt_bound = w2_bias_bound_sqrt(m, L, K, d, eta, tb.moment_bound);
  tb.w2_sharp_bound = w2_bias_bound_sharp(m, L, l_tilde, K, d, eta);
  return tb;
}

}  // namespace theory
}  // namespace prlmc
