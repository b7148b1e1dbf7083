#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "optfair/dataset.hpp"
#include "optfair/fairness.hpp"
#include "optfair/optimizer.hpp"

namespace optfair {

enum class ModelKind { Logistic, Mlp };
enum class LossKind { CrossEntropy, Focal };

std::string model_kind_name(ModelKind m);
ModelKind model_kind_from_name(const std::string& name);
std::string loss_kind_name(LossKind l);
LossKind loss_kind_from_name(const std::string& name);

// Flat-parameter classifier with hand-written backpropagation. Logistic is a
// single linear layer into class logits; Mlp adds one tanh hidden layer.
class Classifier {
 public:
  Classifier(ModelKind kind, int in_dim, int n_classes, int hidden_units);

  std::size_t param_count() const { return param_count_; }
  int n_classes() const { return n_classes_; }

  // Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) per layer.
  std::vector<double> init_params(SeededStream& stream) const;

  void logits(std::span<const double> params, const double* x, std::span<double> out) const;
  // Accumulates d(sample loss)/d(params) given d(loss)/d(logits).
  void backward(std::span<const double> params, const double* x, std::span<const double> dlogits,
                std::span<double> grad) const;
  int predict(std::span<const double> params, const double* x) const;

 private:
  ModelKind kind_;
  int in_dim_;
  int n_classes_;
  int hidden_;
  std::size_t param_count_;
};

// Per-sample loss; fills d(loss)/d(logits). Focal is binary-only.
double loss_and_dlogits(LossKind kind, double focal_xi, double focal_upsilon,
                        std::span<const double> logits, int label, std::span<double> dlogits);

struct TrainOptions {
  ModelKind model = ModelKind::Logistic;
  int hidden_units = 16;
  LossKind loss = LossKind::CrossEntropy;
  double focal_xi = 0.25;
  double focal_upsilon = 2.0;
  int epochs = 100;
  int batch_size = 32;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainRunResult {
  std::vector<double> final_weights;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double f1 = 0.0;
  FairnessReport fairness;
  std::vector<double> loss_curve;  // mean batch loss per epoch
  double initial_loss = 0.0;       // full train-set loss at initialization
  double final_loss = 0.0;         // full train-set loss at the final weights
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
};

// Mini-batch training with a seeded 80/20 split (stratified by group so both
// groups appear in the held-out slice). The split depends only on (seed,
// dataset), never on the optimizer.
TrainRunResult train(const TabularDataset& data, const TrainOptions& options,
                     const OptimizerConfig& optimizer);

double metric_value(const TrainRunResult& result, const std::string& metric);
const std::vector<std::string>& comparison_metrics();

struct NamedOptimizer {
  std::string name;
  OptimizerConfig config;
};

struct PairwiseTest {
  std::string optimizer_a;
  std::string optimizer_b;
  std::string metric;
  double statistic = 0.0;
  double p_value = 1.0;
  bool valid = false;  // false when the test had no usable differences
  std::string note;
};

struct PairedComparison {
  std::vector<std::string> optimizer_names;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<TrainRunResult>> results;  // [optimizer][seed]
  std::vector<PairwiseTest> tests;

  double mean_metric(const std::string& optimizer, const std::string& metric) const;
};

// Every optimizer trained with every seed; the dataset and split for a given
// seed are shared across optimizers. Needs at least 5 seeds.
PairedComparison paired_comparison(
    const std::function<TabularDataset(std::uint64_t)>& dataset_for_seed,
    const std::vector<NamedOptimizer>& optimizers, std::span<const std::uint64_t> seeds,
    const TrainOptions& options, int workers = 1);

PairedComparison paired_comparison(const TabularDataset& data,
                                   const std::vector<NamedOptimizer>& optimizers,
                                   std::span<const std::uint64_t> seeds,
                                   const TrainOptions& options, int workers = 1);

// One fresh dataset per seed, derived from the spec's master seed.
PairedComparison paired_comparison(const SyntheticSpec& spec,
                                   const std::vector<NamedOptimizer>& optimizers,
                                   std::span<const std::uint64_t> seeds,
                                   const TrainOptions& options, int workers = 1);

struct SweepRow {
  double minority_fraction = 0.0;
  std::string optimizer_a;
  std::string optimizer_b;
  std::string metric;
  double abs_difference = 0.0;  // |mean_a - mean_b| across seeds
  double p_value = 1.0;
  bool p_valid = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::pair<double, PairedComparison>> per_fraction;
};

SweepResult imbalance_sweep(const SyntheticSpec& base, std::span<const double> fractions,
                            const std::vector<NamedOptimizer>& optimizers,
                            std::span<const std::uint64_t> seeds, const TrainOptions& options,
                            int workers = 1);

}  // namespace optfair
