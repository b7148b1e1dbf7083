#include "optfair/stationary.hpp"

#include <cmath>
#include <numbers>

namespace optfair {

void StationaryParams::validate() const {
  if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError("stationary: p0 must lie in (0,1)");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("stationary: eta must be positive");
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw ValidationError("stationary: theta must be positive");
}

double StationaryParams::kappa() const {
  return 1.0 / (4.0 * eta * theta * std::sqrt(p0 * p1()));
}

double StationaryParams::vartheta() const { return 1.0 / (8.0 * eta * p0 * p1()); }

namespace {

double gaussian_density(double precision, double mean, double w) {
  return std::sqrt(precision / std::numbers::pi) *
         std::exp(-precision * (w - mean) * (w - mean));
}

}  // namespace

double density_rmsprop(const StationaryParams& params, double w) {
  params.validate();
  return gaussian_density(params.kappa(), params.mean(), w);
}

double density_sgd(const StationaryParams& params, double w) {
  params.validate();
  return gaussian_density(params.vartheta(), params.mean(), w);
}

double delta_threshold(const StationaryParams& params) {
  params.validate();
  const double k = params.kappa();
  const double t = params.vartheta();
  if (std::fabs(t - k) <= 1e-12 * std::max(t, k))
    throw UndefinedValueError("delta_threshold: vartheta == kappa, threshold undefined");
  return std::sqrt(0.5 * std::log(t / k) / (t - k));
}

double ratio_at_fair_min(const StationaryParams& params) {
  params.validate();
  const double k = params.kappa();
  const double t = params.vartheta();
  const double m = params.mean();
  return std::sqrt(k / t) * std::exp((t - k) * m * m);
}

}  // namespace optfair
