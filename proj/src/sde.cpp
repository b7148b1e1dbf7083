#include "optfair/sde.hpp"

#include <cmath>
#include <string>

namespace optfair {

std::vector<double> integrate_sgd_sde(const QuadraticSubgroups& model, double eta, double dt,
                                      double total_time, SeededStream& stream, double w0) {
  if (!(dt > 0.0)) throw ValidationError("sgd_sde: dt must be positive");
  if (dt > eta) throw ValidationError("sgd_sde: dt must not exceed eta");
  if (!(total_time >= 0.0)) throw ValidationError("sgd_sde: total_time must be non-negative");

  const double sigma = model.gradient_covariance();
  const double diffusion = std::sqrt(eta * sigma * dt);
  const auto steps = static_cast<long>(std::llround(total_time / dt));

  std::vector<double> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  double w = w0;
  path.push_back(w);
  for (long k = 0; k < steps; ++k) {
    w += -population_grad(model, w) * dt + diffusion * stream.next_gaussian(0.0, 1.0);
    if (!std::isfinite(w))
      throw NumericError("sgd_sde: path diverged at step " + std::to_string(k));
    path.push_back(w);
  }
  return path;
}

RmspropSdeResult integrate_rmsprop_sde(const QuadraticSubgroups& model, double eta, double gamma,
                                       double theta_global, double epsilon, double dt,
                                       double total_time, SeededStream& stream, double w0,
                                       double u0) {
  if (!(dt > 0.0)) throw ValidationError("rmsprop_sde: dt must be positive");
  if (!(eta > 0.0)) throw ValidationError("rmsprop_sde: eta must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("rmsprop_sde: gamma must be in (0,1)");
  if (!(theta_global >= 0.0) || !(epsilon >= 0.0))
    throw ValidationError("rmsprop_sde: theta and epsilon must be non-negative");

  const double sigma = model.gradient_covariance();
  const double u_rate = (1.0 - gamma) / (eta * eta);
  const double noise_scale = theta_global * eta * std::sqrt(sigma * dt);
  const auto steps = static_cast<long>(std::llround(total_time / dt));

  RmspropSdeResult out;
  out.path.reserve(static_cast<std::size_t>(steps) + 1);
  double w = w0;
  double u = u0 < 0.0 ? sigma : u0;
  out.path.push_back({w, u});
  for (long k = 0; k < steps; ++k) {
    const double p = theta_global * eta * std::sqrt(u) + epsilon * eta;
    if (!(p > 0.0))
      throw NumericError("rmsprop_sde: preconditioner vanished at step " + std::to_string(k));
    const double drift = 0.5 * population_grad(model, w);
    w += -(drift * dt + noise_scale * stream.next_gaussian(0.0, 1.0)) / p;
    u += u_rate * (sigma - u) * dt;
    if (u < 0.0) {
      u = 0.0;
      ++out.u_clip_count;
    }
    if (!std::isfinite(w) || !std::isfinite(u))
      throw NumericError("rmsprop_sde: path diverged at step " + std::to_string(k));
    out.path.push_back({w, u});
  }
  return out;
}

}  // namespace optfair
