#include "prlmc/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "prlmc/schedule.hpp"

namespace prlmc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "batch binary format is little endian");

void require_same_shape(const SampleBatch& a, const SampleBatch& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("batch dimension mismatch");
  if (a.count() != b.count()) throw std::invalid_argument("batch count mismatch");
}

}  // namespace

SampleBatch::SampleBatch(int dimension, std::vector<double> data)
    : d_(dimension), data_(std::move(data)) {
  if (d_ < 1) throw std::invalid_argument("SampleBatch: dimension must be positive");
  if (data_.empty() || data_.size() % static_cast<std::size_t>(d_) != 0) {
    throw std::invalid_argument("SampleBatch: data size must be a positive multiple of d");
  }
  n_ = static_cast<std::int64_t>(data_.size()) / d_;
  for (double v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("SampleBatch: non-finite entry");
  }
}

SampleBatch SampleBatch::from_scalars(std::vector<double> values) {
  return SampleBatch(1, std::move(values));
}

void SampleBatch::save_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  const std::uint64_t header[2] = {static_cast<std::uint64_t>(d_), static_cast<std::uint64_t>(n_)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(data_.data()),
            static_cast<std::streamsize>(data_.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write: " + path);
}

SampleBatch SampleBatch::load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::uint64_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("short header: " + path);
  const std::uint64_t d = header[0];
  const std::uint64_t n = header[1];
  if (d == 0 || n == 0 || d > 1u << 20 || n > 1ull << 40) {
    throw std::runtime_error("implausible batch header: " + path);
  }
  std::vector<double> data(d * n);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!in) throw std::runtime_error("short payload: " + path);
  return SampleBatch(static_cast<int>(d), std::move(data));
}

void SampleBatch::save_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  for (int j = 0; j < d_; ++j) std::fprintf(f, j ? ",x%d" : "x%d", j);
  std::fprintf(f, "\n");
  for (std::int64_t i = 0; i < n_; ++i) {
    for (int j = 0; j < d_; ++j) {
      std::fprintf(f, j ? ",%.17g" : "%.17g", data_[i * d_ + j]);
    }
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

double w2_1d(const SampleBatch& a, const SampleBatch& b) {
  require_same_shape(a, b);
  if (a.dimension() != 1) throw std::invalid_argument("w2_1d: requires 1-D batches");
  std::vector<double> xs(a.flat().begin(), a.flat().end());
  std::vector<double> ys(b.flat().begin(), b.flat().end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double diff = xs[i] - ys[i];
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

double w2_gaussian_isotropic(double sigma1, double sigma2, int d) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || d < 1) {
    throw std::invalid_argument("w2_gaussian_isotropic: bad arguments");
  }
  return std::sqrt(static_cast<double>(d)) * std::fabs(sigma1 - sigma2);
}

double w2_assignment(const SampleBatch& a, const SampleBatch& b) {
  require_same_shape(a, b);
  const std::int64_t n = a.count();
  if (n > 256) throw std::invalid_argument("w2_assignment: n > 256, use w2_1d or closed forms");

  // Squared Euclidean cost matrix.
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto xi = a.row(i);
    for (std::int64_t j = 0; j < n; ++j) {
      const auto yj = b.row(j);
      double c = 0.0;
      for (int k = 0; k < a.dimension(); ++k) {
        const double diff = xi[k] - yj[k];
        c += diff * diff;
      }
      cost[i * n + j] = c;
    }
  }

  // Hungarian algorithm with row/column potentials, one row at a time.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::int64_t> match(n + 1, -1);  // match[col] = row, col in 1..n
  for (std::int64_t i = 1; i <= n; ++i) {
    std::vector<double> min_cost(n + 1, inf);
    std::vector<std::int64_t> parent(n + 1, -1);
    std::vector<char> used(n + 1, 0);
    std::int64_t j0 = 0;
    match[0] = i;
    do {
      used[j0] = 1;
      const std::int64_t i0 = match[j0];
      double delta = inf;
      std::int64_t j1 = -1;
      for (std::int64_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < min_cost[j]) {
          min_cost[j] = cur;
          parent[j] = j0;
        }
        if (min_cost[j] < delta) {
          delta = min_cost[j];
          j1 = j;
        }
      }
      for (std::int64_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_cost[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != -1);
    // Augment along the alternating path.
    while (j0 != 0) {
      const std::int64_t j1 = parent[j0];
      match[j0] = match[j1];
      j0 = j1;
    }
  }

  double total = 0.0;
  for (std::int64_t j = 1; j <= n; ++j) total += cost[(match[j] - 1) * n + (j - 1)];
  return std::sqrt(total / static_cast<double>(n));
}

double tv_1d_histogram(const SampleBatch& a, const SampleBatch& b, int bins, double lo, double hi) {
  require_same_shape(a, b);
  if (a.dimension() != 1) throw std::invalid_argument("tv_1d_histogram: requires 1-D batches");
  if (bins < 2) throw std::invalid_argument("tv_1d_histogram: bins must be >= 2");
  if (!(hi > lo)) throw std::invalid_argument("tv_1d_histogram: empty range");

  const double scale = static_cast<double>(bins) / (hi - lo);
  const auto bin_of = [&](double x) {
    const auto raw = static_cast<std::int64_t>(std::floor((x - lo) * scale));
    return static_cast<int>(std::clamp<std::int64_t>(raw, 0, bins - 1));
  };
  std::vector<std::int64_t> ca(bins, 0), cb(bins, 0);
  for (double x : a.flat()) ++ca[bin_of(x)];
  for (double x : b.flat()) ++cb[bin_of(x)];
  const double na = static_cast<double>(a.count());
  const double nb = static_cast<double>(b.count());
  double acc = 0.0;
  for (int k = 0; k < bins; ++k) {
    acc += std::fabs(static_cast<double>(ca[k]) / na - static_cast<double>(cb[k]) / nb);
  }
  return 0.5 * acc;
}

namespace {

struct StepMoments {
  double ea;
  double ea2;
  double v;
};

StepMoments prlmc_scalar_step_moments(double theta, double eta, int K, int d) {
  const double kd = static_cast<double>(K);
  double sum_i = 0.0, sum_i2 = 0.0;
  for (int i = 0; i < K; ++i) {
    sum_i += i;
    sum_i2 += static_cast<double>(i) * i;
  }
  const double et = eta * theta;
  StepMoments sm;
  sm.ea = 1.0 - et + et * et * (kd - 1.0) / (2.0 * kd);
  const double coeff = et * et / kd;
  const double var_sum = (1.0 / kd) * (1.0 - 1.0 / kd) * sum_i2;
  sm.ea2 = sm.ea * sm.ea + coeff * coeff * var_sum;
  sm.v = et * et * (2.0 * eta / (kd * kd)) * sum_i * d + 2.0 * eta * d;
  return sm;
}

}  // namespace

MomentRecursion quadratic_prlmc_moment_oracle(double theta, double eta, int K, int d,
                                              double x0_norm2, std::int64_t n_steps) {
  if (!(theta > 0.0) || !(eta > 0.0) || K < 1 || d < 1 || !(x0_norm2 >= 0.0) || n_steps < 0) {
    throw std::invalid_argument("quadratic_prlmc_moment_oracle: bad arguments");
  }
  const StepMoments sm = prlmc_scalar_step_moments(theta, eta, K, d);
  if (!(sm.ea2 < 1.0)) {
    throw std::invalid_argument("quadratic_prlmc_moment_oracle: E[A^2] >= 1, step size too large");
  }
  MomentRecursion out;
  out.mean_factor = sm.ea;
  out.second_factor = sm.ea2;
  out.noise_variance = sm.v;
  out.fixed_point = sm.v / (1.0 - sm.ea2);
  out.trajectory.reserve(static_cast<std::size_t>(n_steps) + 1);
  double m2 = x0_norm2;
  out.trajectory.push_back(m2);
  for (std::int64_t k = 0; k < n_steps; ++k) {
    m2 = sm.ea2 * m2 + sm.v;
    out.trajectory.push_back(m2);
  }
  return out;
}

DecreasingMomentTrace quadratic_prlmc_moment_trace(double theta, const StepSchedule& schedule,
                                                   int K, int d, double x0_norm2,
                                                   std::int64_t n_steps) {
  if (!(theta > 0.0) || K < 1 || d < 1 || !(x0_norm2 >= 0.0) || n_steps < 0) {
    throw std::invalid_argument("quadratic_prlmc_moment_trace: bad arguments");
  }
  DecreasingMomentTrace out;
  out.trajectory.reserve(static_cast<std::size_t>(n_steps) + 1);
  double m2 = x0_norm2;
  out.trajectory.push_back(m2);
  out.supremum = m2;
  for (std::int64_t k = 1; k <= n_steps; ++k) {
    const StepMoments sm = prlmc_scalar_step_moments(theta, schedule.gamma(k), K, d);
    m2 = sm.ea2 * m2 + sm.v;
    out.trajectory.push_back(m2);
    out.supremum = std::max(out.supremum, m2);
  }
  return out;
}

LogLogFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_loglog_slope: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("fit_loglog_slope: needs >= 3 points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw std::invalid_argument("fit_loglog_slope: inputs must be positive");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx;
    const double dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_loglog_slope: degenerate x values");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace prlmc
