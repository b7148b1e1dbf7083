#pragma once

#include <string>
#include <vector>

#include "optfair/errors.hpp"
#include "optfair/rng.hpp"

namespace optfair {

// Two-subgroup population with quadratic per-subgroup losses
// L_q(w) = (w - center_q)^2 / 2. Subgroup 0 is sampled with probability p0.
struct QuadraticSubgroups {
  double center_0 = 1.0;
  double center_1 = -1.0;
  double p0 = 0.5;

  double p1() const { return 1.0 - p0; }
  // Root of the population gradient p0*(w - c0) + p1*(w - c1).
  double population_minimizer() const { return p0 * center_0 + p1() * center_1; }
  // Covariance of the subgroup-sampled gradient (independent of w).
  double gradient_covariance() const {
    const double sep = center_0 - center_1;
    return p0 * p1() * sep * sep;
  }
  void validate() const;
};

struct SampledGradient {
  double grad = 0.0;
  int subgroup = 0;
};

double subgroup_loss(const QuadraticSubgroups& model, int q, double w);
double population_loss(const QuadraticSubgroups& model, double w);
double population_grad(const QuadraticSubgroups& model, double w);

// One mini-batch-of-1 draw: pick a subgroup, return its exact gradient at w.
SampledGradient sample_gradient(const QuadraticSubgroups& model, SeededStream& stream, double w);

// |L0(w) - L1(w)|; equals 2|w| for the default centers +-1.
double dp_gap(const QuadraticSubgroups& model, double w);

// Gradient oracle with Gaussian per-subgroup noise: with probability p0 the
// draw is N(mu_0, diag(theta_0^2)), otherwise N(mu_1, diag(theta_1^2)).
struct NgosSpec {
  std::vector<double> mu_0;
  std::vector<double> mu_1;
  std::vector<double> theta_0;
  std::vector<double> theta_1;
  double p0 = 0.5;
  double theta_global = 1.0;

  std::size_t dim() const { return mu_0.size(); }
  double p1() const { return 1.0 - p0; }
  bool isotropic() const;
  void validate() const;

  static NgosSpec isotropic1d(double mu0, double mu1, double theta0, double theta1, double p0);
};

struct VectorSample {
  std::vector<double> grad;
  int subgroup = 0;
};

VectorSample sample_ngos_gradient(const NgosSpec& spec, SeededStream& stream);

// Per-condition structural checks of oracle well-behavedness. Conditions that
// hold for every Gaussian family are reported as passing by construction.
struct NgosCheck {
  std::string condition;
  bool passed = false;
  bool by_construction = false;
  std::string detail;
};

struct NgosValidationReport {
  std::vector<NgosCheck> checks;
  bool all_passed() const;
};

NgosValidationReport validate_ngos(const NgosSpec& spec);

}  // namespace optfair
