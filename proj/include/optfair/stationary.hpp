#pragma once

#include "optfair/errors.hpp"

namespace optfair {

// Parameters of the closed-form long-run iterate densities on the two-subgroup
// quadratic problem. Both densities are Gaussians centred at p0 - p1; kappa
// and vartheta are their precision-like constants.
struct StationaryParams {
  double p0 = 0.5;
  double eta = 0.1;
  double theta = 1.0;  // gradient-noise scale parameter

  double p1() const { return 1.0 - p0; }
  double mean() const { return p0 - p1(); }
  double kappa() const;     // 1 / (4 eta theta sqrt(p0 p1))
  double vartheta() const;  // 1 / (8 eta p0 p1)
  void validate() const;
};

double density_rmsprop(const StationaryParams& params, double w);
double density_sgd(const StationaryParams& params, double w);

// Bias level |p0 - p1| at which the two densities cross at the fair minimum.
// Undefined when vartheta == kappa (p0 = 0.5 for theta = 1).
double delta_threshold(const StationaryParams& params);

// density_rmsprop(0) / density_sgd(0).
double ratio_at_fair_min(const StationaryParams& params);

}  // namespace optfair
