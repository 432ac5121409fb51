#include <cmath>
#include <vector>

#include "doctest.h"

#include "prlmc/potential.hpp"
#include "prlmc/rng.hpp"

using namespace prlmc;

namespace {

std::vector<double> random_point(Stream& s, int d, double radius) {
  std::vector<double> x(static_cast<std::size_t>(d));
  for (auto& v : x) v = radius * (2.0 * s.next_unit() - 1.0);
  return x;
}

double central_diff(const PotentialSpec& p, std::vector<double> x, std::size_t j, double h) {
  x[j] += h;
  const double up = p.value(x);
  x[j] -= 2.0 * h;
  const double down = p.value(x);
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("values at reference points") {
  const auto iso1 = PotentialSpec::isotropic_quadratic(1.0, 1);
  CHECK(iso1.value(std::vector<double>{0.0}) == 0.0);

  const auto iso2 = PotentialSpec::isotropic_quadratic(2.0, 2);
  CHECK(iso2.value(std::vector<double>{1.0, 1.0}) == doctest::Approx(2.0));

  const auto lc = PotentialSpec::quadratic_log_cosh(1.0, 0.5, 2);
  CHECK(lc.value(std::vector<double>{0.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("gradients at reference points") {
  const auto iso = PotentialSpec::isotropic_quadratic(1.0, 3);
  const std::vector<double> x{0.3, -1.2, 4.0};
  CHECK(iso.gradient(x) == x);

  const auto lc = PotentialSpec::quadratic_log_cosh(1.0, 1.0, 1);
  const auto g = lc.gradient(std::vector<double>{1.0});
  CHECK(g[0] == doctest::Approx(1.0 + std::tanh(1.0)).epsilon(1e-12));
  CHECK(g[0] == doctest::Approx(1.76159415595576).epsilon(1e-9));

  for (const auto& p : {iso, lc}) {
    const auto zero = p.gradient(std::vector<double>(p.dimension(), 0.0));
    for (double v : zero) CHECK(v == 0.0);
  }
}

TEST_CASE("declared constants") {
  const auto iso = PotentialSpec::isotropic_quadratic(2.5, 4);
  CHECK(iso.m() == 2.5);
  CHECK(iso.L() == 2.5);
  CHECK(iso.l_tilde() == 0.0);

  const auto ani = PotentialSpec::anisotropic_quadratic({0.5, 2.0, 1.0});
  CHECK(ani.m() == 0.5);
  CHECK(ani.L() == 2.0);
  CHECK(ani.dimension() == 3);

  const auto lc = PotentialSpec::quadratic_log_cosh(1.5, 0.7, 2);
  CHECK(lc.m() == 1.5);
  CHECK(lc.L() == doctest::Approx(2.2));
  CHECK(lc.l_tilde() == 0.7);
}

TEST_CASE("construction and dimension errors") {
  CHECK_THROWS(PotentialSpec::isotropic_quadratic(0.0, 1));
  CHECK_THROWS(PotentialSpec::isotropic_quadratic(1.0, 0));
  CHECK_THROWS(PotentialSpec::anisotropic_quadratic({1.0, -2.0}));
  CHECK_THROWS(PotentialSpec::quadratic_log_cosh(1.0, -0.1, 1));
  const auto p = PotentialSpec::isotropic_quadratic(1.0, 2);
  CHECK_THROWS(p.value(std::vector<double>{1.0}));
  CHECK_THROWS(p.gradient(std::vector<double>{1.0, 2.0, 3.0}));
}

TEST_CASE("finite differences match gradients") {
  Stream s(2024);
  const std::vector<PotentialSpec> specs{
      PotentialSpec::isotropic_quadratic(1.3, 3),
      PotentialSpec::anisotropic_quadratic({0.4, 1.1, 3.0}),
      PotentialSpec::quadratic_log_cosh(1.0, 0.8, 3),
  };
  for (const auto& p : specs) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_point(s, p.dimension(), 10.0 / std::sqrt(3.0));
      const auto g = p.gradient(x);
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double fd = central_diff(p, x, j, 1e-5);
        const double scale = std::max(1.0, std::fabs(g[j]));
        CHECK(std::fabs(fd - g[j]) / scale <= 1e-5);
      }
    }
  }
}

TEST_CASE("strong convexity and Lipschitz constants hold") {
  Stream s(77);
  const std::vector<PotentialSpec> specs{
      PotentialSpec::isotropic_quadratic(0.9, 2),
      PotentialSpec::anisotropic_quadratic({0.4, 2.2}),
      PotentialSpec::quadratic_log_cosh(1.0, 0.5, 2),
  };
  for (const auto& p : specs) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_point(s, p.dimension(), 7.0);
      const auto y = random_point(s, p.dimension(), 7.0);
      const auto gx = p.gradient(x);
      const auto gy = p.gradient(y);
      double dot = 0.0, dist_sq = 0.0, grad_diff_sq = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double dx = x[j] - y[j];
        const double dg = gx[j] - gy[j];
        dot += dg * dx;
        dist_sq += dx * dx;
        grad_diff_sq += dg * dg;
      }
      CHECK(dot >= p.m() * dist_sq - 1e-9 * (1.0 + dist_sq));
      CHECK(grad_diff_sq <= p.L() * p.L() * dist_sq * (1.0 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("log-cosh third derivative stays below the declared bound") {
  const double alpha = 0.6;
  const auto p = PotentialSpec::quadratic_log_cosh(1.0, alpha, 1);
  Stream s(31);
  const double h = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    const double x = 10.0 * (2.0 * s.next_unit() - 1.0);
    const double gp = p.gradient(std::vector<double>{x + h})[0];
    const double g0 = p.gradient(std::vector<double>{x})[0];
    const double gm = p.gradient(std::vector<double>{x - h})[0];
    const double u3 = (gp - 2.0 * g0 + gm) / (h * h);
    CHECK(std::fabs(u3) <= p.l_tilde() + 1e-4);
  }
  // The true per-coordinate maximum is 4 alpha / (3 sqrt 3), strictly below alpha.
  const double x_star = std::atanh(1.0 / std::sqrt(3.0));
  const double gp = p.gradient(std::vector<double>{x_star + h})[0];
  const double g0 = p.gradient(std::vector<double>{x_star})[0];
  const double gm = p.gradient(std::vector<double>{x_star - h})[0];
  CHECK(std::fabs((gp - 2.0 * g0 + gm) / (h * h)) ==
        doctest::Approx(4.0 * alpha / (3.0 * std::sqrt(3.0))).epsilon(1e-4));
}

TEST_CASE("log-cosh value is stable far from the origin") {
  const auto p = PotentialSpec::quadratic_log_cosh(1.0, 1.0, 1);
  const double v = p.value(std::vector<double>{500.0});
  // log cosh(x) -> |x| - log 2 for large |x|.
  CHECK(v == doctest::Approx(0.5 * 500.0 * 500.0 + 500.0 - std::log(2.0)).epsilon(1e-12));
}
