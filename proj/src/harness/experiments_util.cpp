#include "experiments_util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prlmc/theory.hpp"

namespace prlmc {
namespace harness {

std::vector<double> exact_gaussian_batch(const RngPolicy& policy, double theta, std::int64_t n) {
  const double sd = 1.0 / std::sqrt(theta);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    Stream s = derive_stream(policy, static_cast<std::uint64_t>(i), 0, Purpose::EndpointGaussian);
    out[static_cast<std::size_t>(i)] = sd * s.next_gaussian();
  }
  return out;
}

namespace {

double sorted_w2(std::vector<double>& xs, std::vector<double>& ys) {
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double diff = xs[i] - ys[i];
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

W2Estimate w2_vs_exact(const RngPolicy& policy, std::vector<double> samples, double theta,
                       std::int64_t cluster, int bootstrap_rounds) {
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  if (n == 0) throw std::invalid_argument("w2_vs_exact: empty sample set");
  if (cluster < 1 || n % cluster != 0) {
    throw std::invalid_argument("w2_vs_exact: cluster size must divide the sample count");
  }
  std::vector<double> exact = exact_gaussian_batch(policy.sub_policy(kTagReference), theta, n);

  W2Estimate est;
  {
    std::vector<double> xs = samples;
    std::vector<double> ys = exact;
    est.value = sorted_w2(xs, ys);
  }

  if (bootstrap_rounds > 1) {
    const std::int64_t n_clusters = n / cluster;
    Stream idx_stream = derive_stream(policy.sub_policy(kTagBootstrap), 0, 0, Purpose::MidpointTime);
    std::vector<double> resampled(static_cast<std::size_t>(n));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(bootstrap_rounds));
    for (int b = 0; b < bootstrap_rounds; ++b) {
      for (std::int64_t c = 0; c < n_clusters; ++c) {
        const auto pick = static_cast<std::int64_t>(idx_stream.next_unit() *
                                                    static_cast<double>(n_clusters));
        const std::int64_t src = std::min(pick, n_clusters - 1) * cluster;
        std::copy(samples.begin() + src, samples.begin() + src + cluster,
                  resampled.begin() + c * cluster);
      }
      std::vector<double> xs = resampled;
      std::vector<double> ys = exact;
      values.push_back(sorted_w2(xs, ys));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    est.se = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return est;
}

double w2_noise_floor(const RngPolicy& policy, double theta, std::int64_t n, int replicates) {
  const RngPolicy base = policy.sub_policy(kTagFloor);
  double acc = 0.0;
  for (int r = 0; r < replicates; ++r) {
    std::vector<double> a = exact_gaussian_batch(base.sub_policy(2 * r), theta, n);
    std::vector<double> b = exact_gaussian_batch(base.sub_policy(2 * r + 1), theta, n);
    acc += sorted_w2(a, b);
  }
  return acc / static_cast<double>(replicates);
}

VerdictRow bound_row(std::string id, std::string bound_id, double estimate, double se,
                     double floor_allowance, double bound, std::string detail) {
  VerdictRow row;
  row.id = std::move(id);
  row.bound_id = std::move(bound_id);
  row.estimate = estimate;
  row.se = se;
  row.bound = bound;
  const double adjusted = std::max(estimate - floor_allowance - 3.0 * se, 0.0);
  row.verdict = adjusted <= bound ? Verdict::Pass : Verdict::Fail;
  if (detail.empty() && floor_allowance > 0.0) {
    detail = "floor allowance " + CsvWriter::format(floor_allowance);
  }
  row.detail = std::move(detail);
  return row;
}

void attach_theory_bounds(ExperimentReport& report, const ExperimentConfig& config) {
  const PotentialSpec& p = config.sampler.potential;
  nlohmann::ordered_json tb;
  tb["m"] = p.m();
  tb["L"] = p.L();
  tb["l_tilde"] = p.l_tilde();
  tb["K"] = config.sampler.K;
  tb["d"] = p.dimension();
  tb["kappa"] = theory::kappa(p.m(), p.L());
  tb["eta0"] = theory::find_eta0(p.m(), p.L(), config.sampler.K);
  if (config.sampler.schedule.is_constant()) {
    const double eta = std::get<ConstantStep>(config.sampler.schedule.kind()).eta;
    const auto bounds =
        theory::evaluate_bounds(p.m(), p.L(), p.l_tilde(), config.sampler.K, p.dimension(), eta);
    tb["eta"] = eta;
    tb["lambda_eta"] = bounds.lambda_eta;
    tb["b_eta"] = bounds.b_eta;
    tb["d_eta_radius"] = bounds.d_eta_radius;
    tb["moment_bound"] = bounds.moment_bound;
    tb["w2_sqrt_bound"] = bounds.w2_sqrt_bound;
    tb["w2_sharp_bound"] = bounds.w2_sharp_bound;
    tb["w2_sharp_bound_sqrt"] = std::sqrt(bounds.w2_sharp_bound);
  }
  report.summary["theory_bounds"] = tb;
}

LinearFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("fit_linear: bad input");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_linear: degenerate x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace harness
}  // namespace prlmc
