#pragma once

#include <vector>

#include "optfair/rng.hpp"
#include "optfair/subgroup.hpp"

namespace optfair {

// Euler-Maruyama path of dW = -grad_pop(W) dt + sqrt(eta * Sigma) dB with
// Sigma the subgroup-gradient covariance. Returns W at every step, initial
// value included. Requires 0 < dt <= eta.
std::vector<double> integrate_sgd_sde(const QuadraticSubgroups& model, double eta, double dt,
                                      double total_time, SeededStream& stream, double w0 = 0.0);

struct RmspropSdePoint {
  double w = 0.0;
  double u = 0.0;
};

struct RmspropSdeResult {
  std::vector<RmspropSdePoint> path;  // initial point included
  long u_clip_count = 0;              // times u was clipped back to 0
  bool u_clipped() const { return u_clip_count > 0; }
};

// Coupled preconditioned system: the W-drift uses half the mixture gradient,
// matching the drift convention behind the closed-form density constants
// (see StationaryParams). u relaxes toward Sigma at rate (1-gamma)/eta^2;
// negative u excursions are clipped to 0 and counted.
RmspropSdeResult integrate_rmsprop_sde(const QuadraticSubgroups& model, double eta, double gamma,
                                       double theta_global, double epsilon, double dt,
                                       double total_time, SeededStream& stream, double w0 = 0.0,
                                       double u0 = -1.0 /* negative: start at Sigma */);

}  // namespace optfair
