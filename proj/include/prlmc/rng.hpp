// Deterministic counter-derived random streams.
//
// Every random draw in the library comes from a stream derived from
// (master_seed, trial_id, step_index, purpose, index).  Streams for distinct
// keys are statistically independent, and a draw from one stream never
// shifts another, so tests can force individual draws (e.g. all Bernoulli
// hits off) without changing anything else.  Output is bit-for-bit
// reproducible for a fixed seed on one platform.

#pragma once

#include <cstdint>
#include <span>

namespace prlmc {

// splitmix64 finalizer: full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Standard normal quantile, Wichura's PPND16 rational approximation.
// Relative error below 1e-15 on (0,1).
double standard_normal_quantile(double p);

// A self-contained splitmix64 sequence.
class Stream {
 public:
  explicit Stream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform on the open interval (0,1); 53-bit resolution, never 0 or 1.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_gaussian() { return standard_normal_quantile(next_unit()); }

  bool next_bernoulli(double p) { return next_unit() < p; }

 private:
  std::uint64_t state_;
};

// Stream purposes.  Values are part of the derivation key and must not be
// reordered once results are frozen.
enum class Purpose : std::uint64_t {
  EndpointGaussian = 1,
  MidpointGaussian = 2,  // index i >= 1 per midpoint; index 0 is the shared driver slot
  Bernoulli = 3,
  MidpointTime = 4,
  OuBridge = 5,  // conditional noise of the exact OU step inside the coupling
};

struct RngPolicy {
  std::uint64_t master_seed = 0;

  // Independent policy for an auxiliary sample space (reference batches,
  // per-eta sub-experiments, ...).
  RngPolicy sub_policy(std::uint64_t tag) const {
    return RngPolicy{mix64(master_seed ^ (0xA0761D6478BD642Full + tag))};
  }
};

Stream derive_stream(const RngPolicy& policy, std::uint64_t trial_id,
                     std::uint64_t step_index, Purpose purpose,
                     std::uint64_t index = 0);

// Draw interface used by the sampling kernels.  The default implementation
// below derives purpose-keyed streams; tests substitute forcing wrappers.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual void endpoint_gaussian(std::span<double> out) = 0;
  // i >= 1: per-midpoint gaussian; i == 0: the step's shared midpoint driver.
  virtual void midpoint_gaussian(std::uint64_t i, std::span<double> out) = 0;
  virtual bool midpoint_hit(std::uint64_t i, double prob) = 0;
  virtual double midpoint_time() = 0;
  virtual void bridge_gaussian(std::span<double> out) = 0;
};

// Purpose-keyed noise for one (trial, step).
class StepNoise final : public NoiseSource {
 public:
  StepNoise(const RngPolicy& policy, std::uint64_t trial_id, std::uint64_t step_index)
      : policy_(policy), trial_(trial_id), step_(step_index), bernoulli_(0), has_bernoulli_(false) {}

  void rebind(std::uint64_t trial_id, std::uint64_t step_index) {
    trial_ = trial_id;
    step_ = step_index;
    has_bernoulli_ = false;
  }

  void endpoint_gaussian(std::span<double> out) override;
  void midpoint_gaussian(std::uint64_t i, std::span<double> out) override;
  bool midpoint_hit(std::uint64_t i, double prob) override;
  double midpoint_time() override;
  void bridge_gaussian(std::span<double> out) override;

 private:
  RngPolicy policy_;
  std::uint64_t trial_;
  std::uint64_t step_;
  Stream bernoulli_;
  bool has_bernoulli_;
};

}  // namespace prlmc
