#include "optfair/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "optfair/parallel.hpp"
#include "optfair/wilcoxon.hpp"

namespace optfair {

std::string model_kind_name(ModelKind m) { return m == ModelKind::Logistic ? "logistic" : "mlp"; }

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "logistic") return ModelKind::Logistic;
  if (name == "mlp") return ModelKind::Mlp;
  throw ValidationError("unknown model kind: " + name);
}

std::string loss_kind_name(LossKind l) {
  return l == LossKind::CrossEntropy ? "cross_entropy" : "focal";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "cross_entropy" || name == "ce") return LossKind::CrossEntropy;
  if (name == "focal") return LossKind::Focal;
  throw ValidationError("unknown loss kind: " + name);
}

Classifier::Classifier(ModelKind kind, int in_dim, int n_classes, int hidden_units)
    : kind_(kind), in_dim_(in_dim), n_classes_(n_classes), hidden_(hidden_units) {
  if (in_dim <= 0 || n_classes < 2) throw ValidationError("classifier: bad dimensions");
  if (kind == ModelKind::Mlp && hidden_units <= 0)
    throw ValidationError("classifier: hidden_units must be positive");
  if (kind == ModelKind::Logistic)
    param_count_ = static_cast<std::size_t>(n_classes) * (in_dim + 1);
  else
    param_count_ = static_cast<std::size_t>(hidden_) * (in_dim + 1) +
                   static_cast<std::size_t>(n_classes) * (hidden_ + 1);
}

// Parameter layout:
//   logistic: W (C x d) row-major, then b (C)
//   mlp:      W1 (H x d), b1 (H), W2 (C x H), b2 (C)
std::vector<double> Classifier::init_params(SeededStream& stream) const {
  std::vector<double> p(param_count_);
  auto fill_layer = [&](std::size_t offset, std::size_t count, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i)
      p[offset + i] = bound * (2.0 * stream.next_uniform() - 1.0);
  };
  if (kind_ == ModelKind::Logistic) {
    fill_layer(0, param_count_, in_dim_);
  } else {
    const std::size_t l1 = static_cast<std::size_t>(hidden_) * (in_dim_ + 1);
    fill_layer(0, l1, in_dim_);
    fill_layer(l1, param_count_ - l1, hidden_);
  }
  return p;
}

void Classifier::logits(std::span<const double> params, const double* x,
                        std::span<double> out) const {
  if (kind_ == ModelKind::Logistic) {
    const double* w = params.data();
    const double* b = params.data() + static_cast<std::size_t>(n_classes_) * in_dim_;
    for (int c = 0; c < n_classes_; ++c) {
      double s = b[c];
      for (int j = 0; j < in_dim_; ++j) s += w[c * in_dim_ + j] * x[j];
      out[static_cast<std::size_t>(c)] = s;
    }
    return;
  }
  const double* w1 = params.data();
  const double* b1 = w1 + static_cast<std::size_t>(hidden_) * in_dim_;
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + static_cast<std::size_t>(n_classes_) * hidden_;
  std::vector<double> h(static_cast<std::size_t>(hidden_));
  for (int k = 0; k < hidden_; ++k) {
    double s = b1[k];
    for (int j = 0; j < in_dim_; ++j) s += w1[k * in_dim_ + j] * x[j];
    h[static_cast<std::size_t>(k)] = std::tanh(s);
  }
  for (int c = 0; c < n_classes_; ++c) {
    double s = b2[c];
    for (int k = 0; k < hidden_; ++k) s += w2[c * hidden_ + k] * h[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(c)] = s;
  }
}

void Classifier::backward(std::span<const double> params, const double* x,
                          std::span<const double> dlogits, std::span<double> grad) const {
  if (kind_ == ModelKind::Logistic) {
    double* gw = grad.data();
    double* gb = grad.data() + static_cast<std::size_t>(n_classes_) * in_dim_;
    for (int c = 0; c < n_classes_; ++c) {
      const double dl = dlogits[static_cast<std::size_t>(c)];
      for (int j = 0; j < in_dim_; ++j) gw[c * in_dim_ + j] += dl * x[j];
      gb[c] += dl;
    }
    return;
  }
  const double* w1 = params.data();
  const double* b1 = w1 + static_cast<std::size_t>(hidden_) * in_dim_;
  const double* w2 = b1 + hidden_;
  double* gw1 = grad.data();
  double* gb1 = gw1 + static_cast<std::size_t>(hidden_) * in_dim_;
  double* gw2 = gb1 + hidden_;
  double* gb2 = gw2 + static_cast<std::size_t>(n_classes_) * hidden_;

  std::vector<double> h(static_cast<std::size_t>(hidden_));
  for (int k = 0; k < hidden_; ++k) {
    double s = b1[k];
    for (int j = 0; j < in_dim_; ++j) s += w1[k * in_dim_ + j] * x[j];
    h[static_cast<std::size_t>(k)] = std::tanh(s);
  }
  std::vector<double> dh(static_cast<std::size_t>(hidden_), 0.0);
  for (int c = 0; c < n_classes_; ++c) {
    const double dl = dlogits[static_cast<std::size_t>(c)];
    for (int k = 0; k < hidden_; ++k) {
      gw2[c * hidden_ + k] += dl * h[static_cast<std::size_t>(k)];
      dh[static_cast<std::size_t>(k)] += dl * w2[c * hidden_ + k];
    }
    gb2[c] += dl;
  }
  for (int k = 0; k < hidden_; ++k) {
    const double hk = h[static_cast<std::size_t>(k)];
    const double dz = dh[static_cast<std::size_t>(k)] * (1.0 - hk * hk);
    for (int j = 0; j < in_dim_; ++j) gw1[k * in_dim_ + j] += dz * x[j];
    gb1[k] += dz;
  }
}

int Classifier::predict(std::span<const double> params, const double* x) const {
  std::vector<double> out(static_cast<std::size_t>(n_classes_));
  logits(params, x, out);
  int best = 0;
  for (int c = 1; c < n_classes_; ++c)
    if (out[static_cast<std::size_t>(c)] > out[static_cast<std::size_t>(best)]) best = c;
  return best;  // ties resolve to the lower class index
}

double loss_and_dlogits(LossKind kind, double focal_xi, double focal_upsilon,
                        std::span<const double> logits, int label, std::span<double> dlogits) {
  const auto c_count = logits.size();
  if (label < 0 || static_cast<std::size_t>(label) >= c_count)
    throw ValidationError("loss: label out of range");

  if (kind == LossKind::CrossEntropy) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - max_logit);
    const double lse = max_logit + std::log(sum);
    for (std::size_t c = 0; c < c_count; ++c) {
      dlogits[c] = std::exp(logits[c] - lse);
      if (static_cast<int>(c) == label) dlogits[c] -= 1.0;
    }
    return lse - logits[static_cast<std::size_t>(label)];
  }

  if (c_count != 2)
    throw ValidationError("focal loss is defined for binary classification only");
  const double z = logits[1] - logits[0];
  double p = 1.0 / (1.0 + std::exp(-z));
  p = std::clamp(p, 1e-15, 1.0 - 1e-15);
  const double xi = focal_xi;
  const double up = focal_upsilon;
  const double y = label == 1 ? 1.0 : 0.0;

  const double loss = -(xi * y * std::pow(1.0 - p, up) * std::log(p) +
                        (1.0 - xi) * (1.0 - y) * std::pow(p, up) * std::log(1.0 - p));
  // d(loss)/dp, with the power-rule terms dropping out exactly at upsilon = 0.
  double dldp = 0.0;
  if (y == 1.0) {
    dldp = -xi * std::pow(1.0 - p, up) / p;
    if (up != 0.0) dldp += xi * up * std::pow(1.0 - p, up - 1.0) * std::log(p);
  } else {
    dldp = (1.0 - xi) * std::pow(p, up) / (1.0 - p);
    if (up != 0.0) dldp -= (1.0 - xi) * up * std::pow(p, up - 1.0) * std::log(1.0 - p);
  }
  const double dldz = dldp * p * (1.0 - p);
  dlogits[0] = -dldz;
  dlogits[1] = dldz;
  return loss;
}

void TrainOptions::validate() const {
  if (hidden_units <= 0 && model == ModelKind::Mlp)
    throw ValidationError("train: hidden_units must be positive");
  if (epochs < 0) throw ValidationError("train: epochs must be non-negative");
  if (batch_size < 1) throw ValidationError("train: batch_size must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ValidationError("train: test_fraction must lie in (0,1)");
  if (!(focal_xi > 0.0 && focal_xi < 1.0)) throw ValidationError("train: focal_xi must be in (0,1)");
  if (!(focal_upsilon >= 0.0)) throw ValidationError("train: focal_upsilon must be >= 0");
}

namespace {

// Reserved stream indices; trial streams are never used by the trainer.
constexpr std::uint64_t kSplitStream = 1u << 20;
constexpr std::uint64_t kInitStream = (1u << 20) + 1;
constexpr std::uint64_t kShuffleStream = (1u << 20) + 2;

struct Split {
  std::vector<long> train_rows;
  std::vector<long> test_rows;
};

// Group-stratified split, deterministic in (seed, dataset) only.
Split make_split(const TabularDataset& data, double test_fraction, std::uint64_t seed) {
  Split split;
  SeededStream stream(seed, kSplitStream);
  for (int g = 0; g < data.n_groups; ++g) {
    std::vector<long> rows;
    for (long i = 0; i < data.n(); ++i)
      if (data.groups[static_cast<std::size_t>(i)] == g) rows.push_back(i);
    for (std::size_t i = rows.size(); i > 1; --i)
      std::swap(rows[i - 1], rows[stream.next_below(i)]);
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(rows.size())));
    if (rows.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    for (std::size_t i = 0; i < rows.size(); ++i)
      (i < n_test ? split.test_rows : split.train_rows).push_back(rows[i]);
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  if (split.train_rows.empty() || split.test_rows.empty())
    throw ValidationError("train: dataset too small to split");
  return split;
}

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 marks a constant column (output forced to 0)

  double apply(double x, int j) const {
    return scale[static_cast<std::size_t>(j)] == 0.0
               ? 0.0
               : (x - mean[static_cast<std::size_t>(j)]) / scale[static_cast<std::size_t>(j)];
  }
};

Standardizer fit_standardizer(const TabularDataset& data, const std::vector<long>& rows) {
  const int d = data.d();
  Standardizer st;
  st.mean.assign(static_cast<std::size_t>(d), 0.0);
  st.scale.assign(static_cast<std::size_t>(d), 0.0);
  for (long r : rows)
    for (int j = 0; j < d; ++j) st.mean[static_cast<std::size_t>(j)] += data.feature(r, j);
  for (int j = 0; j < d; ++j) st.mean[static_cast<std::size_t>(j)] /= static_cast<double>(rows.size());
  for (long r : rows)
    for (int j = 0; j < d; ++j) {
      const double dx = data.feature(r, j) - st.mean[static_cast<std::size_t>(j)];
      st.scale[static_cast<std::size_t>(j)] += dx * dx;
    }
  for (int j = 0; j < d; ++j) {
    const double var = st.scale[static_cast<std::size_t>(j)] / static_cast<double>(rows.size());
    st.scale[static_cast<std::size_t>(j)] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return st;
}

std::vector<double> standardized_matrix(const TabularDataset& data, const std::vector<long>& rows,
                                        const Standardizer& st) {
  const int d = data.d();
  std::vector<double> out(rows.size() * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j)
      out[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] =
          st.apply(data.feature(rows[i], j), j);
  return out;
}

double full_loss(const Classifier& model, const TrainOptions& opt,
                 std::span<const double> params, const std::vector<double>& x,
                 const std::vector<int>& y, int d) {
  std::vector<double> logit(static_cast<std::size_t>(model.n_classes()));
  std::vector<double> dlogit(static_cast<std::size_t>(model.n_classes()));
  double total = 0.0;
  const auto n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    model.logits(params, &x[i * static_cast<std::size_t>(d)], logit);
    total += loss_and_dlogits(opt.loss, opt.focal_xi, opt.focal_upsilon, logit,
                              y[i], dlogit);
  }
  return total / static_cast<double>(n);
}

double f1_score(const std::vector<int>& truth, const std::vector<int>& pred, int n_classes) {
  auto f1_for = [&](int cls) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == cls, p = pred[i] == cls;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  };
  if (n_classes == 2) return f1_for(1);
  double total = 0.0;
  for (int c = 0; c < n_classes; ++c) total += f1_for(c);
  return total / static_cast<double>(n_classes);  // macro average
}

}  // namespace

TrainRunResult train(const TabularDataset& data, const TrainOptions& options,
                     const OptimizerConfig& optimizer) {
  data.validate();
  options.validate();
  optimizer.validate();

  const Split split = make_split(data, options.test_fraction, options.seed);
  const Standardizer st = fit_standardizer(data, split.train_rows);
  const std::vector<double> x_train = standardized_matrix(data, split.train_rows, st);
  const std::vector<double> x_test = standardized_matrix(data, split.test_rows, st);
  std::vector<int> y_train, y_test, g_test;
  for (long r : split.train_rows) y_train.push_back(data.labels[static_cast<std::size_t>(r)]);
  for (long r : split.test_rows) {
    y_test.push_back(data.labels[static_cast<std::size_t>(r)]);
    g_test.push_back(data.groups[static_cast<std::size_t>(r)]);
  }

  const int d = data.d();
  const Classifier model(options.model, d, data.n_classes, options.hidden_units);
  SeededStream init_stream(options.seed, kInitStream);
  std::vector<double> params = model.init_params(init_stream);

  TrainRunResult result;
  result.optimizer = optimizer;
  result.seed = options.seed;
  result.initial_loss = full_loss(model, options, params, x_train, y_train, d);

  OptimizerState state = OptimizerState::init(params);
  SeededStream shuffle_stream(options.seed, kShuffleStream);
  std::vector<std::size_t> order(y_train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(model.param_count());
  std::vector<double> logit(static_cast<std::size_t>(model.n_classes()));
  std::vector<double> dlogit(static_cast<std::size_t>(model.n_classes()));

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_stream.next_below(i)]);
    double epoch_loss = 0.0;
    long batches = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const double* x = &x_train[order[i] * static_cast<std::size_t>(d)];
        model.logits(state.w, x, logit);
        batch_loss += loss_and_dlogits(options.loss, options.focal_xi, options.focal_upsilon,
                                       logit, y_train[order[i]], dlogit);
        for (auto& dl : dlogit) dl *= inv;
        model.backward(state.w, x, dlogit, grad);
      }
      batch_loss *= inv;
      if (!std::isfinite(batch_loss))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           " (learning rate too high?)");
      step(state, optimizer, grad);
      epoch_loss += batch_loss;
      ++batches;
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(batches));
  }

  result.final_weights = state.w;
  result.final_loss = full_loss(model, options, state.w, x_train, y_train, d);

  auto evaluate = [&](const std::vector<double>& x, const std::vector<int>& y) {
    std::vector<int> pred(y.size());
    long hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      pred[i] = model.predict(state.w, &x[i * static_cast<std::size_t>(d)]);
      hits += pred[i] == y[i];
    }
    return std::make_pair(static_cast<double>(hits) / static_cast<double>(y.size()), pred);
  };
  auto [train_acc, train_pred] = evaluate(x_train, y_train);
  auto [test_acc, test_pred] = evaluate(x_test, y_test);
  result.train_accuracy = train_acc;
  result.test_accuracy = test_acc;
  result.f1 = f1_score(y_test, test_pred, data.n_classes);

  GroupedConfusion conf(data.group_names, data.class_names);
  for (std::size_t i = 0; i < y_test.size(); ++i)
    conf.add(g_test[i], y_test[i], test_pred[i]);
  result.fairness = fairness_report(conf);
  return result;
}

double metric_value(const TrainRunResult& r, const std::string& metric) {
  if (metric == "accuracy") return r.test_accuracy;
  if (metric == "f1") return r.f1;
  if (metric == "f_eod") return r.fairness.f_eod;
  if (metric == "f_eop") return r.fairness.f_eop;
  if (metric == "f_dpa") return r.fairness.f_dpa;
  if (metric == "gap_eop") return r.fairness.gap_eop;
  if (metric == "gap_eod") return r.fairness.gap_eod;
  if (metric == "gap_dpa") return r.fairness.gap_dpa;
  if (metric == "final_loss") return r.final_loss;
  throw ValidationError("unknown metric: " + metric);
}

const std::vector<std::string>& comparison_metrics() {
  static const std::vector<std::string> metrics = {
      "accuracy", "f1", "f_eod", "f_eop", "f_dpa", "gap_eop", "gap_eod", "gap_dpa"};
  return metrics;
}

double PairedComparison::mean_metric(const std::string& optimizer,
                                     const std::string& metric) const {
  for (std::size_t i = 0; i < optimizer_names.size(); ++i) {
    if (optimizer_names[i] != optimizer) continue;
    double total = 0.0;
    for (const auto& r : results[i]) total += metric_value(r, metric);
    return total / static_cast<double>(results[i].size());
  }
  throw ValidationError("unknown optimizer in comparison: " + optimizer);
}

PairedComparison paired_comparison(
    const std::function<TabularDataset(std::uint64_t)>& dataset_for_seed,
    const std::vector<NamedOptimizer>& optimizers, std::span<const std::uint64_t> seeds,
    const TrainOptions& options, int workers) {
  if (optimizers.empty()) throw ValidationError("paired_comparison: no optimizers");
  if (seeds.size() < 5) throw ValidationError("paired_comparison: need at least 5 seeds");

  PairedComparison cmp;
  cmp.seeds.assign(seeds.begin(), seeds.end());
  for (const auto& o : optimizers) cmp.optimizer_names.push_back(o.name);
  cmp.results.assign(optimizers.size(), std::vector<TrainRunResult>(seeds.size()));

  std::vector<TabularDataset> datasets(seeds.size());
  parallel_for(static_cast<long>(seeds.size()), workers,
               [&](long i) { datasets[static_cast<std::size_t>(i)] = dataset_for_seed(seeds[i]); });

  const long jobs = static_cast<long>(optimizers.size() * seeds.size());
  parallel_for(jobs, workers, [&](long job) {
    const std::size_t oi = static_cast<std::size_t>(job) / seeds.size();
    const std::size_t si = static_cast<std::size_t>(job) % seeds.size();
    TrainOptions per_run = options;
    per_run.seed = seeds[si];
    cmp.results[oi][si] = train(datasets[si], per_run, optimizers[oi].config);
  });

  for (std::size_t a = 0; a < optimizers.size(); ++a) {
    for (std::size_t b = a + 1; b < optimizers.size(); ++b) {
      for (const auto& metric : comparison_metrics()) {
        PairwiseTest test;
        test.optimizer_a = optimizers[a].name;
        test.optimizer_b = optimizers[b].name;
        test.metric = metric;
        std::vector<double> va, vb;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
          va.push_back(metric_value(cmp.results[a][s], metric));
          vb.push_back(metric_value(cmp.results[b][s], metric));
        }
        try {
          const auto w = wilcoxon_signed_rank(va, vb);
          test.statistic = w.statistic;
          test.p_value = w.p_value;
          test.valid = true;
        } catch (const InsufficientDataError& e) {
          test.p_value = std::numeric_limits<double>::quiet_NaN();
          test.valid = false;
          test.note = e.what();
        }
        cmp.tests.push_back(std::move(test));
      }
    }
  }
  return cmp;
}

PairedComparison paired_comparison(const TabularDataset& data,
                                   const std::vector<NamedOptimizer>& optimizers,
                                   std::span<const std::uint64_t> seeds,
                                   const TrainOptions& options, int workers) {
  return paired_comparison([&](std::uint64_t) { return data; }, optimizers, seeds, options,
                           workers);
}

PairedComparison paired_comparison(const SyntheticSpec& spec,
                                   const std::vector<NamedOptimizer>& optimizers,
                                   std::span<const std::uint64_t> seeds,
                                   const TrainOptions& options, int workers) {
  return paired_comparison(
      [&](std::uint64_t seed) {
        SeededStream stream(spec.master_seed, seed);
        return generate_synthetic(spec, stream);
      },
      optimizers, seeds, options, workers);
}

SweepResult imbalance_sweep(const SyntheticSpec& base, std::span<const double> fractions,
                            const std::vector<NamedOptimizer>& optimizers,
                            std::span<const std::uint64_t> seeds, const TrainOptions& options,
                            int workers) {
  if (fractions.empty()) throw ValidationError("sweep: no fractions");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 0.5)) throw ValidationError("sweep: fractions must lie in (0, 0.5]");

  SweepResult sweep;
  for (double fraction : fractions) {
    SyntheticSpec spec = base;
    spec.minority_fraction = fraction;
    auto cmp = paired_comparison(spec, optimizers, seeds, options, workers);
    for (std::size_t a = 0; a < optimizers.size(); ++a) {
      for (std::size_t b = a + 1; b < optimizers.size(); ++b) {
        for (const std::string metric : {"f_dpa", "f_eod"}) {
          SweepRow row;
          row.minority_fraction = fraction;
          row.optimizer_a = optimizers[a].name;
          row.optimizer_b = optimizers[b].name;
          row.metric = metric;
          row.abs_difference = std::fabs(cmp.mean_metric(optimizers[a].name, metric) -
                                         cmp.mean_metric(optimizers[b].name, metric));
          for (const auto& t : cmp.tests)
            if (t.optimizer_a == optimizers[a].name && t.optimizer_b == optimizers[b].name &&
                t.metric == metric) {
              row.p_value = t.p_value;
              row.p_valid = t.valid;
            }
          sweep.rows.push_back(std::move(row));
        }
      }
    }
    sweep.per_fraction.emplace_back(fraction, std::move(cmp));
  }
  return sweep;
}

}  // namespace optfair
