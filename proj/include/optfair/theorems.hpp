#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "optfair/rng.hpp"
#include "optfair/subgroup.hpp"

namespace optfair {

// Diagonal of the stationary preconditioner implied by an NGOS spec:
// D_jj = 1 / sqrt(p0 (mu0_j^2 + theta0_j^2) + p1 (mu1_j^2 + theta1_j^2) + eps).
std::vector<double> d_matrix_diag(const NgosSpec& spec, double epsilon);

// Per-coordinate limit of E[v_k]: p0 (mu0^2 + theta0^2) + p1 (mu1^2 + theta1^2).
std::vector<double> v_limit(const NgosSpec& spec);

struct Theorem2Report {
  std::vector<double> d_diag;
  bool condition_met = false;       // all D_jj < 1, the update-contraction precondition
  std::vector<double> v_mean;       // Monte-Carlo mean of v after `steps` iterations
  std::vector<double> v_limit;
  std::vector<double> v_stderr;
  bool v_within_tolerance = false;  // |mean - limit| <= 3 stderr per coordinate
  long contraction_draws = 0;
  long contraction_violations = 0;
  long sample_count = 0;
  bool satisfied = false;
};

// Empirical check of the fairer-updates claim: (a) D from the spec plus its
// precondition flag, (b) the second-moment accumulator's Monte-Carlo mean
// against its analytic limit, (c) ||D (g0 - g1)|| <= max_j D_jj ||g0 - g1||
// (and <= ||g0 - g1|| when max D_jj <= 1) on every draw.
Theorem2Report check_theorem2(const NgosSpec& spec, double gamma, double epsilon, int steps,
                              long draws, SeededStream& stream);

struct Theorem3Report {
  std::vector<double> d_diag;
  bool strict = false;  // all D_jj < 1: the preconditioned bound must win strictly
  double sgd_bound_mean = 0.0;
  double rms_bound_mean = 0.0;
  double realized_sgd_mean = 0.0;
  double realized_rms_mean = 0.0;
  long draws = 0;
  long zero_gradient_draws = 0;
  long violations = 0;
  bool satisfied = false;
};

// One-step demographic-parity-gap bound comparison at iterate w. Stochastic
// gradients are drawn from the warm-up model's subgroup mixture (broadcast
// across the spec's coordinates); D comes from d_spec.
Theorem3Report check_theorem3(const QuadraticSubgroups& model, const NgosSpec& d_spec, double w,
                              double eta, double epsilon, long draws, SeededStream& stream);

struct VarianceScalingPoint {
  double gamma = 0.0;
  int steps = 0;
  double v_variance = 0.0;  // coordinate-averaged var(v) at stationarity
};

// var(v) at several decay factors; the claim under test is proportionality
// to (1 - gamma). Steps per gamma are chosen so the transient has decayed.
std::vector<VarianceScalingPoint> v_variance_scaling(const NgosSpec& spec,
                                                     std::span<const double> gammas, long draws,
                                                     std::uint64_t master_seed);

}  // namespace optfair
