#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "optfair/train.hpp"

using namespace optfair;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.n_samples = 400;
  spec.n_features = 3;
  spec.minority_fraction = 0.25;
  spec.group_mean_0 = {-1.0, 0.0, 0.0};
  spec.group_mean_1 = {1.0, 0.0, 0.0};
  spec.class_balance = 0.5;
  spec.master_seed = 7;
  return spec;
}

// Mean loss over a fixed batch, as a function of the flat parameter vector.
double batch_loss(const Classifier& model, LossKind loss, double xi, double up,
                  const std::vector<double>& params, const std::vector<double>& x,
                  const std::vector<int>& y, int d) {
  std::vector<double> logit(static_cast<std::size_t>(model.n_classes()));
  std::vector<double> dlogit(static_cast<std::size_t>(model.n_classes()));
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    model.logits(params, &x[i * static_cast<std::size_t>(d)], logit);
    total += loss_and_dlogits(loss, xi, up, logit, y[i], dlogit);
  }
  return total / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("synthetic generation is deterministic with exact group sizes") {
  const auto spec = small_spec();
  SeededStream s1(spec.master_seed, 0), s2(spec.master_seed, 0);
  const auto a = generate_synthetic(spec, s1);
  const auto b = generate_synthetic(spec, s2);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);

  long minority = 0;
  for (int g : a.groups) minority += g == 0;
  CHECK(minority == std::lround(spec.minority_fraction * spec.n_samples));

  SyntheticSpec tiny = spec;
  tiny.minority_fraction = 0.02;
  tiny.n_samples = 1000;
  SeededStream s3(1, 0);
  const auto c = generate_synthetic(tiny, s3);
  long m = 0;
  for (int g : c.groups) m += g == 0;
  CHECK(m == 20);
}

TEST_CASE("synthetic group means land near the configured centers") {
  auto spec = small_spec();
  spec.n_samples = 20000;
  SeededStream s(3, 0);
  const auto data = generate_synthetic(spec, s);
  double sum = 0.0;
  long count = 0;
  for (long i = 0; i < data.n(); ++i) {
    if (data.groups[static_cast<std::size_t>(i)] != 1) continue;
    sum += data.feature(i, 0);
    ++count;
  }
  CHECK(sum / static_cast<double>(count) ==
        doctest::Approx(1.0).epsilon(3.0 / std::sqrt(static_cast<double>(count))));
}

TEST_CASE("synthetic class balance tracks the requested fraction") {
  auto spec = small_spec();
  spec.n_samples = 10000;
  spec.class_balance = 0.3;
  SeededStream s(4, 0);
  const auto data = generate_synthetic(spec, s);
  long positives = 0;
  for (int y : data.labels) positives += y;
  CHECK(static_cast<double>(positives) / static_cast<double>(data.n()) ==
        doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("csv loader roundtrip and error paths") {
  const std::string path = "test_tabular.csv";
  {
    std::ofstream out(path);
    out << "f1,f2,label,group\n";
    out << "0.5,1.0,yes,a\n";
    out << "-0.5,2.0,no,b\n";
    out << "1.5,3.0,yes,a\n";
  }
  const auto data = load_csv(path, CsvSchema{});
  CHECK(data.n() == 3);
  CHECK(data.d() == 2);
  CHECK(data.n_groups == 2);
  CHECK(data.feature(1, 0) == doctest::Approx(-0.5));

  CsvSchema missing;
  missing.group_column = "sex";
  CHECK_THROWS_AS(load_csv(path, missing), IoError);
  CHECK_THROWS_AS(load_csv("nope.csv", CsvSchema{}), IoError);

  const std::string bad = "test_tabular_bad.csv";
  {
    std::ofstream out(bad);
    out << "f1,label,group\nabc,yes,a\n";
  }
  CHECK_THROWS_AS(load_csv(bad, CsvSchema{}), IoError);

  const std::string constant = "test_tabular_const.csv";
  {
    std::ofstream out(constant);
    out << "f1,f2,label,group\n";
    out << "1.0,0.1,yes,a\n1.0,0.2,no,b\n1.0,0.3,yes,a\n1.0,0.4,no,b\n";
  }
  const auto cdata = load_csv(constant, CsvSchema{});
  REQUIRE(cdata.warnings.size() == 1);
  CHECK(cdata.warnings[0].find("f1") != std::string::npos);
}

TEST_CASE("focal loss with upsilon zero halves the cross entropy") {
  SeededStream s(5, 0);
  std::vector<double> logit(2), dl_ce(2), dl_focal(2);
  for (int trial = 0; trial < 200; ++trial) {
    logit[0] = gaussian(s, 0.0, 2.0);
    logit[1] = gaussian(s, 0.0, 2.0);
    const int y = trial % 2;
    const double ce = loss_and_dlogits(LossKind::CrossEntropy, 0.25, 2.0, logit, y, dl_ce);
    const double focal = loss_and_dlogits(LossKind::Focal, 0.5, 0.0, logit, y, dl_focal);
    CHECK(focal == doctest::Approx(0.5 * ce).epsilon(1e-12));
    CHECK(dl_focal[0] == doctest::Approx(0.5 * dl_ce[0]).epsilon(1e-9));
    CHECK(dl_focal[1] == doctest::Approx(0.5 * dl_ce[1]).epsilon(1e-9));
  }
}

TEST_CASE("focal loss rejects multiclass logits") {
  std::vector<double> logit(3, 0.0), dl(3);
  CHECK_THROWS_AS(loss_and_dlogits(LossKind::Focal, 0.25, 2.0, logit, 0, dl), ValidationError);
}

TEST_CASE("analytic gradients match central finite differences") {
  SeededStream s(6, 0);
  const int d = 4, batch = 8;
  for (auto model_kind : {ModelKind::Logistic, ModelKind::Mlp}) {
    for (auto loss : {LossKind::CrossEntropy, LossKind::Focal}) {
      const Classifier model(model_kind, d, 2, 5);
      for (int probe = 0; probe < 100; ++probe) {
        std::vector<double> params(model.param_count());
        for (auto& p : params) p = gaussian(s, 0.0, 0.5);
        std::vector<double> x(batch * d);
        std::vector<int> y(batch);
        for (auto& v : x) v = gaussian(s, 0.0, 1.0);
        for (int i = 0; i < batch; ++i) y[static_cast<std::size_t>(i)] = (probe + i) % 2;

        // Analytic gradient of the mean batch loss.
        std::vector<double> grad(model.param_count(), 0.0);
        std::vector<double> logit(2), dlogit(2);
        for (int i = 0; i < batch; ++i) {
          model.logits(params, &x[static_cast<std::size_t>(i) * d], logit);
          loss_and_dlogits(loss, 0.25, 2.0, logit, y[static_cast<std::size_t>(i)], dlogit);
          for (auto& v : dlogit) v /= batch;
          model.backward(params, &x[static_cast<std::size_t>(i) * d], dlogit, grad);
        }

        const double h = 1e-5;
        double num = 0.0, denom = 0.0;
        for (std::size_t j = 0; j < params.size(); ++j) {
          auto plus = params, minus = params;
          plus[j] += h;
          minus[j] -= h;
          const double fd = (batch_loss(model, loss, 0.25, 2.0, plus, x, y, d) -
                             batch_loss(model, loss, 0.25, 2.0, minus, x, y, d)) /
                            (2.0 * h);
          num += (grad[j] - fd) * (grad[j] - fd);
          denom += grad[j] * grad[j];
        }
        const double rel = std::sqrt(num) / std::max(std::sqrt(denom), 1e-12);
        CHECK(rel <= 1e-4);
      }
    }
  }
}

TEST_CASE("training separable data reaches high accuracy") {
  auto spec = small_spec();
  spec.n_samples = 600;
  spec.group_mean_0 = {-2.0, 0.0, 0.0};
  spec.group_mean_1 = {2.0, 0.0, 0.0};
  SeededStream s(8, 0);
  const auto data = generate_synthetic(spec, s);

  TrainOptions opt;
  opt.epochs = 200;
  opt.seed = 1;
  OptimizerConfig sgd;
  sgd.algorithm = Algorithm::SGD;
  sgd.eta = 0.1;
  const auto result = train(data, opt, sgd);
  CHECK(result.test_accuracy >= 0.85);
  CHECK(result.final_loss < result.initial_loss);
  CHECK(result.loss_curve.size() == 200);
}

TEST_CASE("zero-epoch training echoes the initial state") {
  SeededStream s(9, 0);
  const auto data = generate_synthetic(small_spec(), s);
  TrainOptions opt;
  opt.epochs = 0;
  opt.seed = 3;
  OptimizerConfig sgd;
  sgd.algorithm = Algorithm::SGD;
  const auto result = train(data, opt, sgd);
  CHECK(result.loss_curve.empty());
  CHECK(result.final_loss == doctest::Approx(result.initial_loss));
  CHECK(result.test_accuracy > 0.2);  // chance-level band, not a crash
  CHECK(result.test_accuracy < 0.8);
}

TEST_CASE("same seed reproduces the result bit-for-bit") {
  SeededStream s(10, 0);
  const auto data = generate_synthetic(small_spec(), s);
  TrainOptions opt;
  opt.epochs = 20;
  opt.seed = 11;
  OptimizerConfig rms;
  rms.algorithm = Algorithm::RMSProp;
  rms.eta = 0.01;
  const auto a = train(data, opt, rms);
  const auto b = train(data, opt, rms);
  CHECK(a.final_weights == b.final_weights);
  CHECK(a.test_accuracy == b.test_accuracy);
  CHECK(a.fairness.f_dpa == b.fairness.f_dpa);
}

TEST_CASE("split depends on the seed but not on the optimizer") {
  SeededStream s(12, 0);
  const auto data = generate_synthetic(small_spec(), s);
  TrainOptions opt;
  opt.epochs = 0;  // results then depend only on the split and init
  opt.seed = 5;
  OptimizerConfig sgd, adam;
  sgd.algorithm = Algorithm::SGD;
  adam.algorithm = Algorithm::Adam;
  const auto a = train(data, opt, sgd);
  const auto b = train(data, opt, adam);
  CHECK(a.test_accuracy == b.test_accuracy);
  CHECK(a.initial_loss == b.initial_loss);
}

TEST_CASE("mlp trains and beats chance on nonlinear structure") {
  auto spec = small_spec();
  spec.n_samples = 500;
  SeededStream s(13, 0);
  const auto data = generate_synthetic(spec, s);
  TrainOptions opt;
  opt.model = ModelKind::Mlp;
  opt.hidden_units = 8;
  opt.epochs = 60;
  opt.seed = 2;
  OptimizerConfig adam;
  adam.algorithm = Algorithm::Adam;
  adam.eta = 0.01;
  const auto result = train(data, opt, adam);
  CHECK(result.final_loss < result.initial_loss);
  CHECK(result.test_accuracy > 0.6);
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  SeededStream s(14, 0);
  auto data = generate_synthetic(small_spec(), s);
  TrainOptions opt;
  opt.epochs = 50;
  opt.seed = 1;
  OptimizerConfig sgd;
  sgd.algorithm = Algorithm::SGD;
  sgd.eta = 1e12;  // drives logits to overflow
  CHECK_THROWS_AS(train(data, opt, sgd), NumericError);
}

TEST_CASE("paired comparison shares datasets and reports p-values") {
  auto spec = small_spec();
  spec.n_samples = 300;
  std::vector<NamedOptimizer> opts;
  OptimizerConfig rms;
  rms.algorithm = Algorithm::RMSProp;
  rms.eta = 0.01;
  OptimizerConfig sgd;
  sgd.algorithm = Algorithm::SGD;
  sgd.eta = 0.1;
  opts.push_back({"rmsprop", rms});
  opts.push_back({"sgd", sgd});
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6};
  TrainOptions topt;
  topt.epochs = 15;

  const auto cmp = paired_comparison(spec, opts, seeds, topt, 2);
  CHECK(cmp.results.size() == 2);
  CHECK(cmp.results[0].size() == seeds.size());
  CHECK_FALSE(cmp.tests.empty());
  for (const auto& t : cmp.tests)
    if (t.valid) {
      CHECK(t.p_value >= 0.0);
      CHECK(t.p_value <= 1.0);
    }

  // Identical optimizer configs produce all-zero differences: p is n/a.
  std::vector<NamedOptimizer> twins = {{"sgd_a", sgd}, {"sgd_b", sgd}};
  const auto tied = paired_comparison(spec, twins, seeds, topt, 2);
  for (const auto& t : tied.tests) CHECK_FALSE(t.valid);

  const std::vector<std::uint64_t> too_few = {1, 2, 3};
  CHECK_THROWS_AS(paired_comparison(spec, opts, too_few, topt), ValidationError);
}

TEST_CASE("degenerate sweep equals the paired comparison") {
  auto spec = small_spec();
  spec.n_samples = 300;
  std::vector<NamedOptimizer> opts;
  OptimizerConfig rms;
  rms.algorithm = Algorithm::RMSProp;
  rms.eta = 0.01;
  OptimizerConfig sgd;
  sgd.algorithm = Algorithm::SGD;
  sgd.eta = 0.1;
  opts.push_back({"rmsprop", rms});
  opts.push_back({"sgd", sgd});
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  TrainOptions topt;
  topt.epochs = 10;

  const double fractions[] = {0.25};
  const auto sweep = imbalance_sweep(spec, fractions, opts, seeds, topt, 2);
  REQUIRE(sweep.rows.size() == 2);  // f_dpa and f_eod for one pair
  const auto direct = paired_comparison(spec, opts, seeds, topt, 2);
  const double expect = std::fabs(direct.mean_metric("rmsprop", "f_dpa") -
                                  direct.mean_metric("sgd", "f_dpa"));
  CHECK(sweep.rows[0].abs_difference == doctest::Approx(expect).epsilon(1e-12));

  const double bad_fraction[] = {0.7};
  CHECK_THROWS_AS(imbalance_sweep(spec, bad_fraction, opts, seeds, topt), ValidationError);
}
