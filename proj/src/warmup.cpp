#include "optfair/warmup.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "optfair/parallel.hpp"

namespace optfair {

void WarmupConfig::validate() const {
  model.validate();
  optimizer.validate();
  if (trials <= 0) throw ValidationError("warmup: trials must be positive");
  if (epochs < 0) throw ValidationError("warmup: epochs must be non-negative");
  if (steps_per_epoch <= 0) throw ValidationError("warmup: steps_per_epoch must be positive");
  if (!(fair_threshold > 0.0)) throw ValidationError("warmup: fair_threshold must be positive");
  if (w0.kind == InitialCondition::Kind::Uniform && !(w0.hi > w0.lo))
    throw ValidationError("warmup: uniform initial condition needs lo < hi");
}

int WarmupRun::diverged_count() const {
  int n = 0;
  for (auto d : diverged) n += d;
  return n;
}

namespace {

double draw_initial(const InitialCondition& ic, SeededStream& stream) {
  if (ic.kind == InitialCondition::Kind::Fixed) return ic.value;
  return ic.lo + (ic.hi - ic.lo) * stream.next_uniform();
}

}  // namespace

WarmupRun run_warmup_trajectories(const WarmupConfig& config, int workers) {
  config.validate();
  const int E = config.epochs;
  WarmupRun run;
  run.trials = config.trials;
  run.epochs = E;
  run.config = config;
  run.iterates.assign(static_cast<std::size_t>(config.trials) * (E + 1), 0.0);
  run.diverged.assign(static_cast<std::size_t>(config.trials), 0);

  parallel_for(config.trials, workers, [&](long t) {
    SeededStream stream(config.master_seed, static_cast<std::uint64_t>(t));
    double* row = &run.iterates[static_cast<std::size_t>(t) * (E + 1)];
    OptimizerState state = OptimizerState::init({draw_initial(config.w0, stream)});
    row[0] = state.w[0];
    bool dead = !std::isfinite(state.w[0]);
    for (int e = 1; e <= E; ++e) {
      for (int s = 0; s < config.steps_per_epoch && !dead; ++s) {
        const auto g = sample_gradient(config.model, stream, state.w[0]);
        if (!std::isfinite(g.grad)) {
          dead = true;
          break;
        }
        step(state, config.optimizer, std::span<const double>(&g.grad, 1));
        if (!std::isfinite(state.w[0])) dead = true;
      }
      row[e] = dead ? std::numeric_limits<double>::quiet_NaN() : state.w[0];
    }
    run.diverged[static_cast<std::size_t>(t)] = dead ? 1 : 0;
  });
  return run;
}

ConvergenceCurve evaluate_curve(const WarmupRun& run, double fair_center, double fair_threshold) {
  ConvergenceCurve curve;
  curve.trials = run.trials;
  curve.diverged_count = run.diverged_count();
  curve.config = run.config;
  curve.config.fair_center = fair_center;
  curve.config.fair_threshold = fair_threshold;

  const int first = run.epochs == 0 ? 0 : 1;
  for (int e = first; e <= run.epochs; ++e) {
    int in_fair = 0;
    for (int t = 0; t < run.trials; ++t) {
      const double w = run.iterate(t, e);
      if (std::fabs(w - fair_center) < fair_threshold) ++in_fair;  // NaN fails the test
    }
    curve.epoch.push_back(e);
    curve.fraction_fair.push_back(static_cast<double>(in_fair) / run.trials);
  }
  return curve;
}

ConvergenceCurve run_warmup(const WarmupConfig& config, int workers) {
  const WarmupRun run = run_warmup_trajectories(config, workers);
  return evaluate_curve(run, config.fair_center, config.fair_threshold);
}

StationaryRun stationary_histogram(const WarmupConfig& config, long burn_in, long samples,
                                   double lo, double hi, int bins) {
  config.validate();
  if (burn_in <= 0 || samples <= 0)
    throw ValidationError("stationary_histogram: burn_in and samples must be positive");

  SeededStream stream(config.master_seed, 0);
  OptimizerState state = OptimizerState::init({draw_initial(config.w0, stream)});
  StationaryRun out{Histogram(lo, hi, bins)};

  double mean = 0.0, m2 = 0.0;
  long count = 0;
  const long total = burn_in + samples;
  for (long k = 0; k < total; ++k) {
    const auto g = sample_gradient(config.model, stream, state.w[0]);
    step(state, config.optimizer, std::span<const double>(&g.grad, 1));
    const double w = state.w[0];
    if (!std::isfinite(w))
      throw NumericError("stationary_histogram: trajectory diverged at step " + std::to_string(k));
    if (k < burn_in) continue;
    out.histogram.add(w);
    ++count;
    const double d = w - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (w - mean);
  }
  out.samples = count;
  out.mean = mean;
  out.variance = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  return out;
}

}  // namespace optfair
