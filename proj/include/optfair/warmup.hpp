#pragma once

#include <cstdint>
#include <vector>

#include "optfair/histogram.hpp"
#include "optfair/optimizer.hpp"
#include "optfair/subgroup.hpp"

namespace optfair {

struct InitialCondition {
  enum class Kind { Fixed, Uniform };
  Kind kind = Kind::Fixed;
  double value = 0.0;  // Fixed
  double lo = 0.0;     // Uniform
  double hi = 0.0;

  static InitialCondition fixed(double v) { return {Kind::Fixed, v, 0.0, 0.0}; }
  static InitialCondition uniform(double lo, double hi) { return {Kind::Uniform, 0.0, lo, hi}; }
};

struct WarmupConfig {
  QuadraticSubgroups model;
  OptimizerConfig optimizer;
  int trials = 1000;
  int epochs = 100;
  int steps_per_epoch = 1;
  double fair_center = 0.0;
  double fair_threshold = 0.2;
  InitialCondition w0;
  std::uint64_t master_seed = 0;

  void validate() const;
};

// Stored trajectories of one Monte-Carlo batch. iterate(t, e) holds trial t's
// weight after e epochs (e = 0 is the initial condition). Diverged trials keep
// NaN from the first non-finite step onward.
struct WarmupRun {
  int trials = 0;
  int epochs = 0;
  std::vector<double> iterates;   // trials * (epochs + 1), row-major by trial
  std::vector<std::uint8_t> diverged;
  WarmupConfig config;

  double iterate(int trial, int epoch) const {
    return iterates[static_cast<std::size_t>(trial) * (epochs + 1) + epoch];
  }
  int diverged_count() const;
};

struct ConvergenceCurve {
  std::vector<int> epoch;           // epoch numbers for each entry
  std::vector<double> fraction_fair;
  int trials = 0;
  int diverged_count = 0;
  WarmupConfig config;

  double final_fraction() const { return fraction_fair.back(); }
};

WarmupRun run_warmup_trajectories(const WarmupConfig& config, int workers = 1);

// Fractions re-evaluated on stored iterates; rows cover epochs 1..E, or the
// single epoch-0 row when the run has no epochs.
ConvergenceCurve evaluate_curve(const WarmupRun& run, double fair_center, double fair_threshold);

ConvergenceCurve run_warmup(const WarmupConfig& config, int workers = 1);

// One long trajectory: burn_in steps discarded, then `samples` iterates are
// recorded. Throws NumericError (with the step index) on divergence.
struct StationaryRun {
  Histogram histogram;
  long samples = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance
};

StationaryRun stationary_histogram(const WarmupConfig& config, long burn_in, long samples,
                                   double lo, double hi, int bins);

}  // namespace optfair
