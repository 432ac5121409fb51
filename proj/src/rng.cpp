#include "prlmc/rng.hpp"

#include <cmath>

namespace prlmc {

namespace {

// Wichura (1988), algorithm AS 241, PPND16.
constexpr double kA[8] = {
    3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
    1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
    3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr double kB[8] = {
    1.0,                      4.2313330701600911252e+1, 6.8718700749205790830e+2,
    5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
    2.8729085735721942674e+4, 5.2264952788528545610e+3};
constexpr double kC[8] = {
    1.42343711074968357734e0,  4.63033784615654529590e0,  5.76949722146069140550e0,
    3.64784832476320460504e0,  1.27045825245236838258e0,  2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double kD[8] = {
    1.0,                       2.05319162663775882187e0,  1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9};
constexpr double kE[8] = {
    6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double kF[8] = {
    1.0,                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15};

inline double poly7(const double (&c)[8], double r) {
  return ((((((c[7] * r + c[6]) * r + c[5]) * r + c[4]) * r + c[3]) * r + c[2]) * r + c[1]) * r +
         c[0];
}

}  // namespace

double standard_normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly7(kA, r) / poly7(kB, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = poly7(kC, r) / poly7(kD, r);
  } else {
    r -= 5.0;
    value = poly7(kE, r) / poly7(kF, r);
  }
  return (q < 0.0) ? -value : value;
}

Stream derive_stream(const RngPolicy& policy, std::uint64_t trial_id, std::uint64_t step_index,
                     Purpose purpose, std::uint64_t index) {
  std::uint64_t s = policy.master_seed;
  s = mix64(s + 0x9E3779B97F4A7C15ull * (trial_id + 1));
  s = mix64(s + 0xC2B2AE3D27D4EB4Full * (step_index + 1));
  s = mix64(s + 0x165667B19E3779F9ull * ((static_cast<std::uint64_t>(purpose) << 32) ^ index));
  return Stream(s);
}

void StepNoise::endpoint_gaussian(std::span<double> out) {
  Stream s = derive_stream(policy_, trial_, step_, Purpose::EndpointGaussian);
  for (double& v : out) v = s.next_gaussian();
}

void StepNoise::midpoint_gaussian(std::uint64_t i, std::span<double> out) {
  Stream s = derive_stream(policy_, trial_, step_, Purpose::MidpointGaussian, i);
  for (double& v : out) v = s.next_gaussian();
}

bool StepNoise::midpoint_hit(std::uint64_t i, double prob) {
  // One stream per step; hits are consumed in index order by the kernels.
  (void)i;
  if (!has_bernoulli_) {
    bernoulli_ = derive_stream(policy_, trial_, step_, Purpose::Bernoulli);
    has_bernoulli_ = true;
  }
  return bernoulli_.next_bernoulli(prob);
}

double StepNoise::midpoint_time() {
  Stream s = derive_stream(policy_, trial_, step_, Purpose::MidpointTime);
  return s.next_unit();
}

void StepNoise::bridge_gaussian(std::span<double> out) {
  Stream s = derive_stream(policy_, trial_, step_, Purpose::OuBridge);
  for (double& v : out) v = s.next_gaussian();
}

}  // namespace prlmc
