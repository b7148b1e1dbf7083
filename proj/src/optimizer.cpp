#include "optfair/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace optfair {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::SGD: return "sgd";
    case Algorithm::SGDMomentum: return "sgd_momentum";
    case Algorithm::RMSProp: return "rmsprop";
    case Algorithm::Adam: return "adam";
    case Algorithm::AdamW: return "adamw";
    case Algorithm::AdaBound: return "adabound";
  }
  throw ValidationError("unknown algorithm enum");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "sgd") return Algorithm::SGD;
  if (name == "sgd_momentum" || name == "sgdm") return Algorithm::SGDMomentum;
  if (name == "rmsprop") return Algorithm::RMSProp;
  if (name == "adam") return Algorithm::Adam;
  if (name == "adamw") return Algorithm::AdamW;
  if (name == "adabound") return Algorithm::AdaBound;
  throw ValidationError("unknown algorithm name: " + name);
}

bool uses_second_moment(Algorithm a) {
  return a == Algorithm::RMSProp || a == Algorithm::Adam || a == Algorithm::AdamW ||
         a == Algorithm::AdaBound;
}

void OptimizerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("optimizer: eta must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("optimizer: gamma must be in (0,1)");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ValidationError("optimizer: beta1 must be in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ValidationError("optimizer: beta2 must be in (0,1)");
  if (!(epsilon > 0.0)) throw ValidationError("optimizer: epsilon must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ValidationError("optimizer: momentum must be in [0,1)");
  if (!(weight_decay >= 0.0)) throw ValidationError("optimizer: weight_decay must be >= 0");
  if (!(adabound_final_lr > 0.0)) throw ValidationError("optimizer: adabound_final_lr must be positive");
  if (!(adabound_gamma > 0.0)) throw ValidationError("optimizer: adabound_gamma must be positive");
}

OptimizerState OptimizerState::init(std::vector<double> w0) {
  OptimizerState s;
  s.v.assign(w0.size(), 0.0);
  s.m.assign(w0.size(), 0.0);
  s.w = std::move(w0);
  s.k = 0;
  return s;
}

std::pair<double, double> adabound_bounds(const OptimizerConfig& c, std::uint64_t k) {
  const double kk = static_cast<double>(k);
  const double lower = c.adabound_final_lr * (1.0 - 1.0 / (c.adabound_gamma * kk + 1.0));
  const double upper = c.adabound_final_lr * (1.0 + 1.0 / (c.adabound_gamma * kk));
  return {lower, upper};
}

void step(OptimizerState& s, const OptimizerConfig& c, std::span<const double> grad) {
  const std::size_t n = s.w.size();
  if (grad.size() != n) throw ValidationError("step: gradient dimension mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericError("step: non-finite gradient");

  s.k += 1;
  switch (c.algorithm) {
    case Algorithm::SGD:
      for (std::size_t j = 0; j < n; ++j) s.w[j] -= c.eta * grad[j];
      return;

    case Algorithm::SGDMomentum:
      for (std::size_t j = 0; j < n; ++j) {
        s.m[j] = c.momentum * s.m[j] + grad[j];
        s.w[j] -= c.eta * s.m[j];
      }
      return;

    case Algorithm::RMSProp:
      // epsilon sits inside the root here.
      for (std::size_t j = 0; j < n; ++j) {
        s.v[j] = c.gamma * s.v[j] + (1.0 - c.gamma) * grad[j] * grad[j];
        s.w[j] -= c.eta * grad[j] / std::sqrt(s.v[j] + c.epsilon);
      }
      return;

    case Algorithm::AdamW:
      for (std::size_t j = 0; j < n; ++j) s.w[j] -= c.eta * c.weight_decay * s.w[j];
      [[fallthrough]];
    case Algorithm::Adam: {
      const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.k));
      const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.k));
      for (std::size_t j = 0; j < n; ++j) {
        s.m[j] = c.beta1 * s.m[j] + (1.0 - c.beta1) * grad[j];
        s.v[j] = c.beta2 * s.v[j] + (1.0 - c.beta2) * grad[j] * grad[j];
        const double m_hat = s.m[j] / bc1;
        const double v_hat = s.v[j] / bc2;
        // epsilon outside the root.
        s.w[j] -= c.eta * m_hat / (std::sqrt(v_hat) + c.epsilon);
      }
      return;
    }

    case Algorithm::AdaBound: {
      const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.k));
      const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.k));
      const auto [lower, upper] = adabound_bounds(c, s.k);
      for (std::size_t j = 0; j < n; ++j) {
        s.m[j] = c.beta1 * s.m[j] + (1.0 - c.beta1) * grad[j];
        s.v[j] = c.beta2 * s.v[j] + (1.0 - c.beta2) * grad[j] * grad[j];
        const double m_hat = s.m[j] / bc1;
        const double v_hat = s.v[j] / bc2;
        const double rate = std::clamp(c.eta / (std::sqrt(v_hat) + c.epsilon), lower, upper);
        s.w[j] -= rate * m_hat;
      }
      return;
    }
  }
  throw ValidationError("step: unknown algorithm");
}

std::vector<double> effective_rate(const OptimizerState& s, const OptimizerConfig& c) {
  if (!uses_second_moment(c.algorithm))
    throw UnsupportedAlgorithmError("effective_rate: " + algorithm_name(c.algorithm) +
                                    " has no second-moment preconditioner");
  const std::uint64_t k_eff = std::max<std::uint64_t>(s.k, 1);
  std::vector<double> rate(s.w.size());
  for (std::size_t j = 0; j < s.w.size(); ++j) {
    if (c.algorithm == Algorithm::RMSProp) {
      rate[j] = c.eta / std::sqrt(s.v[j] + c.epsilon);
      continue;
    }
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(k_eff));
    const double v_hat = s.v[j] / bc2;
    rate[j] = c.eta / (std::sqrt(v_hat) + c.epsilon);
    if (c.algorithm == Algorithm::AdaBound) {
      const auto [lower, upper] = adabound_bounds(c, k_eff);
      rate[j] = std::clamp(rate[j], lower, upper);
    }
  }
  return rate;
}

}  // namespace optfair
