#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "optfair/errors.hpp"

namespace optfair {

enum class Algorithm { SGD, SGDMomentum, RMSProp, Adam, AdamW, AdaBound };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);
bool uses_second_moment(Algorithm a);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::SGD;
  double eta = 0.1;
  double gamma = 0.9;    // RMSProp decay
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double momentum = 0.9;
  double weight_decay = 1e-4;      // AdamW decoupled decay
  double adabound_final_lr = 0.1;
  double adabound_gamma = 1e-3;

  void validate() const;
};

struct OptimizerState {
  std::vector<double> w;
  std::vector<double> v;  // second-moment accumulator
  std::vector<double> m;  // first-moment / momentum accumulator
  std::uint64_t k = 0;

  static OptimizerState init(std::vector<double> w0);
};

// One update with the configured rule. The step counter is post-increment:
// the first call uses k = 1 in the bias corrections.
void step(OptimizerState& state, const OptimizerConfig& config, std::span<const double> grad);

// Per-coordinate multiplier applied to the (bias-corrected) gradient
// direction at the current state. Only defined for second-moment algorithms.
std::vector<double> effective_rate(const OptimizerState& state, const OptimizerConfig& config);

// [lower_k, upper_k] clip interval for AdaBound's per-coordinate rate.
std::pair<double, double> adabound_bounds(const OptimizerConfig& config, std::uint64_t k);

}  // namespace optfair
