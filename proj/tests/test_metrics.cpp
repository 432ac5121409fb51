#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "prlmc/metrics.hpp"
#include "prlmc/rng.hpp"
#include "prlmc/schedule.hpp"

using namespace prlmc;

namespace {

SampleBatch random_batch(Stream& s, int d, std::int64_t n, double scale) {
  std::vector<double> data(static_cast<std::size_t>(n * d));
  for (auto& v : data) v = scale * s.next_gaussian();
  return SampleBatch(d, std::move(data));
}

// Brute-force optimal matching cost by permutation enumeration, n <= 7.
double w2_bruteforce(const SampleBatch& a, const SampleBatch& b) {
  const int n = static_cast<int>(a.count());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto xi = a.row(i);
      const auto yj = b.row(perm[i]);
      for (int k = 0; k < a.dimension(); ++k) {
        const double diff = xi[k] - yj[k];
        total += diff * diff;
      }
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / n);
}

}  // namespace

TEST_CASE("1-D quantile distance") {
  const auto a = SampleBatch::from_scalars({0.0, 2.0});
  const auto b = SampleBatch::from_scalars({1.0, 3.0});
  CHECK(w2_1d(a, b) == doctest::Approx(1.0));
  CHECK(w2_1d(a, a) == 0.0);

  // Translation moves the distance by exactly the shift.
  Stream s(9);
  auto base = random_batch(s, 1, 500, 1.0);
  std::vector<double> shifted(base.flat().begin(), base.flat().end());
  for (auto& v : shifted) v += 2.5;
  CHECK(w2_1d(base, SampleBatch(1, shifted)) == doctest::Approx(2.5).epsilon(1e-12));

  CHECK_THROWS(w2_1d(a, SampleBatch::from_scalars({1.0, 2.0, 3.0})));
  CHECK_THROWS(w2_1d(random_batch(s, 2, 4, 1.0), random_batch(s, 2, 4, 1.0)));
}

TEST_CASE("1-D distance satisfies the triangle inequality") {
  Stream s(123);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_batch(s, 1, 64, 1.0);
    const auto b = random_batch(s, 1, 64, 2.0);
    const auto c = random_batch(s, 1, 64, 0.5);
    CHECK(w2_1d(a, c) <= w2_1d(a, b) + w2_1d(b, c) + 1e-9);
  }
}

TEST_CASE("isotropic gaussian closed form") {
  CHECK(w2_gaussian_isotropic(1.0, 1.0, 5) == 0.0);
  CHECK(w2_gaussian_isotropic(1.0, 2.0, 1) == doctest::Approx(1.0));
  CHECK(w2_gaussian_isotropic(1.0, 2.0, 4) == doctest::Approx(2.0));
}

TEST_CASE("assignment distance") {
  Stream s(77);
  SUBCASE("agrees with brute force in small instances") {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + static_cast<int>(s.next_unit() * 5.99);
      const auto a = random_batch(s, 2, n, 1.0);
      const auto b = random_batch(s, 2, n, 1.0);
      CHECK(w2_assignment(a, b) == doctest::Approx(w2_bruteforce(a, b)).epsilon(1e-10));
    }
  }
  SUBCASE("agrees with the quantile coupling in 1-D") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = random_batch(s, 1, 64, 1.5);
      const auto b = random_batch(s, 1, 64, 0.7);
      CHECK(std::fabs(w2_assignment(a, b) - w2_1d(a, b)) <= 1e-12);
    }
  }
  SUBCASE("permutation invariance and identity") {
    const auto a = SampleBatch(2, {0.0, 0.0, 1.0, 0.0});
    const auto b = SampleBatch(2, {1.0, 0.0, 0.0, 0.0});
    CHECK(w2_assignment(a, b) == doctest::Approx(0.0));
    CHECK(w2_assignment(a, a) == doctest::Approx(0.0));
  }
  SUBCASE("never better than a random permutation") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto a = random_batch(s, 3, 16, 1.0);
      const auto b = random_batch(s, 3, 16, 1.0);
      const double opt = w2_assignment(a, b);
      std::vector<int> perm(16);
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = 15; i > 0; --i) {
        std::swap(perm[i], perm[static_cast<int>(s.next_unit() * (i + 1))]);
      }
      double total = 0.0;
      for (int i = 0; i < 16; ++i) {
        for (int k = 0; k < 3; ++k) {
          const double diff = a.row(i)[k] - b.row(perm[i])[k];
          total += diff * diff;
        }
      }
      CHECK(opt <= std::sqrt(total / 16.0) + 1e-12);
    }
  }
  SUBCASE("size guard") {
    const auto big = random_batch(s, 1, 257, 1.0);
    CHECK_THROWS(w2_assignment(big, big));
  }
}

TEST_CASE("histogram total variation") {
  const auto a = SampleBatch::from_scalars({-1.0, -0.5, 0.0, 0.5});
  CHECK(tv_1d_histogram(a, a, 10, -2.0, 2.0) == 0.0);

  const auto left = SampleBatch::from_scalars({-1.5, -1.0, -0.7});
  const auto right = SampleBatch::from_scalars({0.7, 1.0, 1.5});
  CHECK(tv_1d_histogram(left, right, 20, -2.0, 2.0) == doctest::Approx(1.0));

  // Mass outside the range is folded inward, so far-apart batches still
  // register full separation.
  const auto inside = SampleBatch::from_scalars({0.0, 0.1, -0.1});
  const auto outside = SampleBatch::from_scalars({50.0, 51.0, 52.0});
  CHECK(tv_1d_histogram(inside, outside, 20, -2.0, 2.0) == doctest::Approx(1.0));

  CHECK_THROWS(tv_1d_histogram(a, a, 1, -2.0, 2.0));
  CHECK_THROWS(tv_1d_histogram(a, a, 10, 2.0, -2.0));

  // Same-law batches at n = 20000, 40 bins: fluctuation scale sqrt(bins/n).
  Stream s(5150);
  const auto x = random_batch(s, 1, 20000, 1.0);
  const auto y = random_batch(s, 1, 20000, 1.0);
  CHECK(tv_1d_histogram(x, y, 40, -5.0, 5.0) < 5.0 * std::sqrt(40.0 / 20000.0));
}

TEST_CASE("same-law quantile distance shrinks as samples double") {
  // Consistency of the empirical estimator: the mean distance between two
  // batches drawn from one law falls at least like n^{-1/4} as n grows.
  Stream s(606060);
  double prev = 1e300;
  for (const std::int64_t n : {1000, 4000, 16000, 64000}) {
    double mean = 0.0;
    const int replicates = 8;
    for (int r = 0; r < replicates; ++r) {
      const auto a = random_batch(s, 1, n, 1.0);
      const auto b = random_batch(s, 1, n, 1.0);
      mean += w2_1d(a, b);
    }
    mean /= replicates;
    CHECK(mean < prev / std::sqrt(std::sqrt(4.0)));  // at least the n^{-1/4} rate
    prev = mean;
  }
}

TEST_CASE("second-moment recursion constants") {
  const auto rec = quadratic_prlmc_moment_oracle(1.0, 0.1, 2, 1, 0.0, 10000);
  CHECK(rec.mean_factor == doctest::Approx(0.9025).epsilon(1e-15));
  CHECK(rec.second_factor == doctest::Approx(0.8145125).epsilon(1e-12));
  CHECK(rec.noise_variance == doctest::Approx(0.2005).epsilon(1e-15));
  CHECK(rec.fixed_point == doctest::Approx(0.2005 / (1.0 - 0.8145125)).epsilon(1e-12));
  CHECK(rec.fixed_point == doctest::Approx(1.0809).epsilon(1e-4));
  // Iterating the recursion reaches the fixed point.
  CHECK(std::fabs(rec.trajectory.back() - rec.fixed_point) < 1e-10);
  // Trajectory is monotone increasing from zero toward the fixed point.
  CHECK(rec.trajectory.front() == 0.0);
  CHECK(rec.trajectory[1] == doctest::Approx(0.2005));

  // K = 1 collapses to the plain Euler chain fixed point 2d/(theta(2 - eta theta)).
  const auto k1 = quadratic_prlmc_moment_oracle(1.0, 0.1, 1, 1, 0.0, 0);
  CHECK(k1.fixed_point == doctest::Approx(2.0 / 1.9).epsilon(1e-12));
  CHECK(k1.second_factor == doctest::Approx(0.81).epsilon(1e-15));

  // Small steps approach the true stationary second moment d/theta.
  const auto fine = quadratic_prlmc_moment_oracle(2.0, 1e-5, 3, 4, 0.0, 0);
  CHECK(fine.fixed_point == doctest::Approx(4.0 / 2.0).epsilon(1e-4));

  // Non-contractive steps are rejected.
  CHECK_THROWS(quadratic_prlmc_moment_oracle(1.0, 2.5, 2, 1, 0.0, 0));
}

TEST_CASE("decreasing-step moment trace") {
  const auto sched = StepSchedule::polynomial(4.0, 1.0, 7);
  const auto trace = quadratic_prlmc_moment_trace(1.0, sched, 2, 1, 9.0, 2000);
  CHECK(trace.trajectory.front() == 9.0);
  CHECK(trace.supremum == 9.0);  // starts above the fixed point and decays
  CHECK(trace.trajectory.back() < 1.2);
  CHECK(trace.trajectory.back() > 0.8);

  // Constant schedule reproduces the constant-step recursion.
  const auto const_trace =
      quadratic_prlmc_moment_trace(1.0, StepSchedule::constant(0.1), 2, 1, 0.0, 50);
  const auto rec = quadratic_prlmc_moment_oracle(1.0, 0.1, 2, 1, 0.0, 50);
  for (std::size_t i = 0; i < const_trace.trajectory.size(); ++i) {
    CHECK(const_trace.trajectory[i] == doctest::Approx(rec.trajectory[i]).epsilon(1e-14));
  }
}

TEST_CASE("log-log regression") {
  const std::vector<double> xs{1.0, 2.0, 4.0, 8.0};
  std::vector<double> ys = xs;
  auto fit = fit_loglog_slope(xs, ys);
  CHECK(fit.slope == doctest::Approx(1.0));
  CHECK(fit.r2 == doctest::Approx(1.0));

  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = xs[i] * xs[i];
  fit = fit_loglog_slope(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.0));

  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = 3.7 * std::pow(xs[i], 1.5);
  fit = fit_loglog_slope(xs, ys);
  CHECK(fit.slope == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.7)).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));

  CHECK_THROWS(fit_loglog_slope(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}));
  CHECK_THROWS(fit_loglog_slope(std::vector<double>{1.0, -2.0, 3.0},
                                std::vector<double>{1.0, 2.0, 3.0}));
}

TEST_CASE("batch io round-trips") {
  Stream s(404);
  const auto batch = random_batch(s, 3, 17, 2.0);
  const std::string path = "test_batch_roundtrip.bin";
  batch.save_binary(path);
  const auto loaded = SampleBatch::load_binary(path);
  CHECK(loaded.dimension() == 3);
  CHECK(loaded.count() == 17);
  for (std::size_t i = 0; i < batch.flat().size(); ++i) {
    CHECK(loaded.flat()[i] == batch.flat()[i]);
  }
  std::remove(path.c_str());

  CHECK_THROWS(SampleBatch(1, {1.0, std::nan("")}));
  CHECK_THROWS(SampleBatch(0, {1.0}));
  CHECK_THROWS(SampleBatch(2, {1.0}));
}

TEST_CASE("batch csv export") {
  const SampleBatch batch(2, {1.5, -2.0, 0.25, 1e-17});
  const std::string path = "test_batch_export.csv";
  batch.save_csv(path);
  std::ifstream in(path);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "x0,x1");
  CHECK(row1 == "1.5,-2");
  CHECK(row2 == "0.25,1.0000000000000001e-17");
  std::remove(path.c_str());
}
