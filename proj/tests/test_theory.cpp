#include <cmath>
#include <vector>

#include "doctest.h"

#include "prlmc/rng.hpp"
#include "prlmc/theory.hpp"

using namespace prlmc;
using namespace prlmc::theory;

namespace {

// Independent bisection oracle for the admissible-step threshold: largest
// eta with (1 + 3L^2) eta + 4 (2 - 1/K) L^4 eta^3 <= m.
double eta0_oracle(double m, double L, int K) {
  const auto ok = [&](double eta) {
    return (1.0 + 3.0 * L * L) * eta +
               4.0 * (2.0 - 1.0 / K) * L * L * L * L * eta * eta * eta <=
           m;
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("kappa") {
  CHECK(kappa(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(kappa(1.0, 3.0) == doctest::Approx(1.5));
  CHECK(kappa(2.0, 2.0) == doctest::Approx(2.0));
  CHECK_THROWS(kappa(3.0, 1.0));
  CHECK_THROWS(kappa(0.0, 1.0));

  Stream s(5);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.1 + 3.0 * s.next_unit();
    const double L = m * (1.0 + 5.0 * s.next_unit());
    const double k = kappa(m, L);
    CHECK(k >= m);
    CHECK(k < 2.0 * m);
  }
}

TEST_CASE("drift constants at the reference configuration") {
  const auto drift = lyapunov_constants(1.0, 1.0, 2, 1, 0.1);
  CHECK(drift.lambda == doctest::Approx(0.9406).epsilon(1e-12));
  CHECK(drift.b == doctest::Approx(0.3566).epsilon(1e-12));
  CHECK(drift.radius == doctest::Approx(std::sqrt(3.566)).epsilon(1e-12));
}

TEST_CASE("largest admissible step") {
  SUBCASE("matches the independent bisection") {
    struct Case {
      double m, L;
      int K;
    };
    for (const Case& c : {Case{1.0, 1.0, 2}, Case{1.0, 1.0, 1}, Case{1.0, 1.0, 1000000},
                          Case{0.5, 2.0, 4}, Case{2.0, 2.0, 16}}) {
      CHECK(find_eta0(c.m, c.L, c.K) == doctest::Approx(eta0_oracle(c.m, c.L, c.K)).epsilon(1e-9));
    }
  }
  SUBCASE("reference values solve the cubic") {
    const double e2 = find_eta0(1.0, 1.0, 2);
    CHECK(4.0 * e2 + 6.0 * e2 * e2 * e2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(e2 == doctest::Approx(0.2314117).epsilon(1e-5));
    const double e1 = find_eta0(1.0, 1.0, 1);
    CHECK(4.0 * e1 + 4.0 * e1 * e1 * e1 == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("interior points contract") {
    for (int K : {1, 2, 8}) {
      const double eta0 = find_eta0(1.0, 1.0, K);
      CHECK(lyapunov_constants(1.0, 1.0, K, 1, eta0 / 2.0).lambda < 1.0);
      CHECK(lyapunov_constants(1.0, 1.0, K, 3, 0.99 * eta0).lambda < 1.0);
    }
  }
}

TEST_CASE("lambda is convex in eta: decreasing to its minimum, then increasing") {
  for (int K : {1, 2, 8}) {
    const double eta0 = find_eta0(1.0, 1.0, K);
    double prev = lyapunov_constants(1.0, 1.0, K, 1, eta0 / 200.0).lambda;
    bool increasing = false;
    for (int i = 2; i <= 200; ++i) {
      const double lambda = lyapunov_constants(1.0, 1.0, K, 1, i * eta0 / 200.0).lambda;
      if (increasing) {
        CHECK(lambda >= prev);
      } else if (lambda > prev) {
        increasing = true;
      }
      CHECK(lambda < 1.0);
      prev = lambda;
    }
    CHECK(increasing);  // the minimum sits strictly inside (0, eta0)
  }
}

TEST_CASE("stationary moment bound") {
  CHECK(stationary_moment_bound(1.0, 1.0, 2, 1, 0.1) == doctest::Approx(2.56).epsilon(1e-12));
  // K = 1 drops the 1 - 1/K term.
  CHECK(stationary_moment_bound(1.0, 1.0, 1, 1, 0.1) ==
        doctest::Approx(2.0 + 4.0 * 0.01).epsilon(1e-12));
  // Linear in dimension.
  CHECK(stationary_moment_bound(1.0, 1.0, 2, 7, 0.1) ==
        doctest::Approx(7.0 * 2.56).epsilon(1e-12));
}

TEST_CASE("sqrt-eta bias bound") {
  const double bound = w2_bias_bound_sqrt(1.0, 1.0, 2, 1, 0.1, 2.56);
  const double first = std::sqrt(2.0 + 0.04 + 0.08);
  const double second = std::sqrt(3.0) * std::sqrt(0.1 * 2.56 / 3.0 + 1.0);
  CHECK(bound == doctest::Approx(std::sqrt(0.1) * (first + second)).epsilon(1e-12));
  CHECK(bound == doctest::Approx(1.0310478).epsilon(1e-6));

  // K = 1: the midpoint factor becomes sqrt(2).
  const double b1 = w2_bias_bound_sqrt(1.0, 1.0, 1, 1, 0.1, 2.0);
  CHECK(b1 == doctest::Approx(std::sqrt(0.1) *
                              (first + std::sqrt(2.0) * std::sqrt(0.1 * 2.0 / 3.0 + 1.0)))
                  .epsilon(1e-12));

  // Vanishes like sqrt(eta).
  const double r1 = w2_bias_bound_sqrt(1.0, 1.0, 2, 1, 1e-6, 2.0) / std::sqrt(1e-6);
  const double r2 = w2_bias_bound_sqrt(1.0, 1.0, 2, 1, 1e-8, 2.0) / std::sqrt(1e-8);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-4));
}

TEST_CASE("sharp bias bound") {
  const double bound = w2_bias_bound_sharp(1.0, 1.0, 0.0, 2, 1, 0.1);
  CHECK(bound == doctest::Approx(0.02 * (8.0 + 0.01 / 6.0 + 0.2 + 2.56 * 3.6 + 3.1))
                     .epsilon(1e-12));
  CHECK(bound == doctest::Approx(0.410353333333333).epsilon(1e-9));
  CHECK(std::sqrt(bound) == doctest::Approx(0.6406).epsilon(1e-3));

  // The third-derivative term enters as 12 kappa^{-2} d^2 eta^2 l_tilde^2.
  const double with_l = w2_bias_bound_sharp(1.0, 1.0, 0.5, 2, 1, 0.1);
  CHECK(with_l - bound == doctest::Approx(0.02 * 6.0 * 0.25).epsilon(1e-12));

  // O(eta^2) as eta -> 0.
  const double r1 = w2_bias_bound_sharp(1.0, 1.0, 0.0, 2, 1, 1e-5) / 1e-10;
  const double r2 = w2_bias_bound_sharp(1.0, 1.0, 0.0, 2, 1, 1e-6) / 1e-12;
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-4));
}

TEST_CASE("decay bound") {
  const auto sched = StepSchedule::constant(0.1);
  const auto b1 = wasserstein_decay_bound(sched, 1.0, 1.0, 0.0, 2, 1, 0.0, 1.0, 1);
  CHECK(b1.u1 == doctest::Approx(1.9).epsilon(1e-12));
  const double brace = 1.0 * (10.0 - 2.0 + 0.01 / 6.0 + 0.2) + 1.0 * (0.6 + 3.0) + (0.1 + 3.0);
  CHECK(b1.u2 == doctest::Approx(0.001 * brace).epsilon(1e-12));

  // u1 decreases geometrically; u2 converges to its fixed point.
  const auto at = wasserstein_decay_bound_at(sched, 1.0, 1.0, 0.0, 2, 1, 0.0, 1.0,
                                             {1, 2, 10, 100, 500});
  for (std::size_t i = 1; i < at.size(); ++i) CHECK(at[i].u1 < at[i - 1].u1);
  CHECK(at[4].u2 == doctest::Approx(0.001 * brace / (1.0 - 0.95)).epsilon(1e-3));

  // Batch evaluation agrees with single-point evaluation.
  const auto single = wasserstein_decay_bound(sched, 1.0, 1.0, 0.0, 2, 1, 0.0, 1.0, 100);
  CHECK(single.u1 == doctest::Approx(at[3].u1).epsilon(1e-14));
  CHECK(single.u2 == doctest::Approx(at[3].u2).epsilon(1e-14));

  // Long horizons go through the log-space product without over/underflow.
  const auto far = wasserstein_decay_bound(sched, 1.0, 1.0, 0.0, 2, 1, 0.0, 1.0, 20000);
  CHECK(far.u1 >= 0.0);
  CHECK(far.u1 < 1e-300);
  CHECK(far.u2 == doctest::Approx(0.001 * brace / (1.0 - 0.95)).epsilon(1e-6));

  // Aggressive schedules are rejected.
  CHECK_THROWS(wasserstein_decay_bound(StepSchedule::constant(2.5), 1.0, 1.0, 0.0, 2, 1, 0.0,
                                       1.0, 1));
}

TEST_CASE("midpoint count pmf") {
  CHECK(poisson_midpoint_pmf(4, 0) == doctest::Approx(0.31640625).epsilon(1e-12));
  CHECK_THROWS(poisson_midpoint_pmf(4, 5));
  CHECK(poisson_midpoint_pmf(1, 1) == doctest::Approx(1.0));
  CHECK(poisson_midpoint_pmf(1, 0) == doctest::Approx(0.0));

  for (int K : {2, 4, 17, 100}) {
    double total = 0.0;
    for (int n = 0; n <= K; ++n) total += poisson_midpoint_pmf(K, n);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Large-K limit: exp(-1) / n!.
  double factorial = 1.0;
  for (int n = 0; n <= 5; ++n) {
    if (n > 0) factorial *= n;
    CHECK(poisson_midpoint_pmf(1000000, n) ==
          doctest::Approx(std::exp(-1.0) / factorial).epsilon(1e-4));
  }
}

TEST_CASE("binomial-to-poisson distance") {
  CHECK(binomial_poisson_tv(100) < 0.01);
  CHECK(binomial_poisson_tv(2) > binomial_poisson_tv(100));
  CHECK(binomial_poisson_tv(1000) < binomial_poisson_tv(100));
}

TEST_CASE("continuous-time moment bound") {
  CHECK(langevin_moment_bound(9.0, 1.0, 1, 0.0) == doctest::Approx(9.0));
  CHECK(langevin_moment_bound(9.0, 2.0, 3, 1e9) == doctest::Approx(1.5));
  CHECK(langevin_moment_bound(4.0, 1.0, 1, 1.0) ==
        doctest::Approx(4.0 * std::exp(-2.0) + 1.0 - std::exp(-2.0)).epsilon(1e-12));
  CHECK(langevin_moment_bound(4.0, 1.0, 1, 1.0) == doctest::Approx(1.40601).epsilon(1e-5));
}

TEST_CASE("bound collection") {
  const auto tb = evaluate_bounds(1.0, 1.0, 0.0, 2, 1, 0.1);
  CHECK(tb.kappa == doctest::Approx(1.0));
  CHECK(tb.lambda_eta == doctest::Approx(0.9406));
  CHECK(tb.moment_bound == doctest::Approx(2.56));
  CHECK(tb.w2_sharp_bound == doctest::Approx(0.410353333333333).epsilon(1e-9));
  CHECK(tb.eta0 == doctest::Approx(0.2314117).epsilon(1e-5));
  CHECK(tb.lambda_eta < 1.0);
  // sqrt bound evaluated with the moment bound standing in for pi_eta(|x|^2).
  CHECK(tb.w2_sqrt_bound == doctest::Approx(w2_bias_bound_sqrt(1.0, 1.0, 2, 1, 0.1, 2.56)));
}
