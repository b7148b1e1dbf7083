#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <optional>
#include <vector>

#include "optfair/fairness.hpp"
#include "optfair/rng.hpp"

using namespace optfair;

namespace {

// Independent exhaustive-loop oracle over the raw counts. Shares only the
// stated conventions (0/0 ratio = 1, x/0 skipped, missing rates skipped).
struct Oracle {
  int G, C;
  const GroupedConfusion& conf;

  std::optional<double> tpr(int g, int c) const {
    double num = conf.at(g, c, c), den = 0;
    for (int p = 0; p < C; ++p) den += conf.at(g, c, p);
    if (den == 0) return std::nullopt;
    return num / den;
  }
  std::optional<double> fpr(int g, int c) const {
    double num = 0, den = 0;
    for (int t = 0; t < C; ++t) {
      if (t == c) continue;
      num += conf.at(g, t, c);
      for (int p = 0; p < C; ++p) den += conf.at(g, t, p);
    }
    if (den == 0) return std::nullopt;
    return num / den;
  }
  std::optional<double> pred(int g, int c) const {
    double num = 0, den = 0;
    for (int t = 0; t < C; ++t)
      for (int p = 0; p < C; ++p) {
        den += conf.at(g, t, p);
        if (p == c) num += conf.at(g, t, p);
      }
    if (den == 0) return std::nullopt;
    return num / den;
  }

  static void fold_ratio(std::optional<double> a, std::optional<double> b, double& best) {
    if (!a || !b) return;
    if (*b == 0.0) {
      if (*a == 0.0) best = std::min(best, 1.0);
      return;
    }
    best = std::min(best, *a / *b);
  }

  double f_eod() const {
    double best = 2.0;
    for (int c = 0; c < C; ++c)
      for (int j = 0; j < G; ++j)
        for (int q = 0; q < G; ++q) {
          if (j == q) continue;
          fold_ratio(tpr(j, c), tpr(q, c), best);
          fold_ratio(fpr(j, c), fpr(q, c), best);
        }
    return best > 1.5 ? 1.0 : best;
  }
  double f_eop() const {
    double best = 2.0;
    for (int i = 0; i < G; ++i)
      for (int j = 0; j < G; ++j) {
        if (i == j) continue;
        double si = 0, sj = 0;
        bool any = false;
        for (int c = 0; c < C; ++c) {
          const auto a = tpr(i, c), b = tpr(j, c);
          if (a && b) {
            si += *a;
            sj += *b;
            any = true;
          }
        }
        if (!any) continue;
        if (sj == 0.0) {
          if (si == 0.0) best = std::min(best, 1.0);
          continue;
        }
        best = std::min(best, si / sj);
      }
    return best > 1.5 ? 1.0 : best;
  }
  double f_dpa() const {
    double best = 2.0;
    for (int c = 0; c < C; ++c)
      for (int j = 0; j < G; ++j)
        for (int q = 0; q < G; ++q) {
          if (j == q) continue;
          fold_ratio(pred(j, c), pred(q, c), best);
        }
    return best > 1.5 ? 1.0 : best;
  }
  GapMetrics gaps() const {
    GapMetrics g;
    for (int c = 0; c < C; ++c)
      for (int j = 0; j < G; ++j)
        for (int q = 0; q < G; ++q) {
          const auto tj = tpr(j, c), tq = tpr(q, c);
          if (tj && tq) {
            g.gap_eop = std::max(g.gap_eop, std::fabs(*tj - *tq));
            g.gap_eod = std::max(g.gap_eod, std::fabs(*tj - *tq));
          }
          const auto fj = fpr(j, c), fq = fpr(q, c);
          if (fj && fq) g.gap_eod = std::max(g.gap_eod, std::fabs(*fj - *fq));
          const auto pj = pred(j, c), pq = pred(q, c);
          if (pj && pq) g.gap_dpa = std::max(g.gap_dpa, std::fabs(*pj - *pq));
        }
    return g;
  }
};

// Two binary groups: a has (TP=8, FN=2, FP=2, TN=8), b has (TP=9, FN=1, FP=1, TN=9).
GroupedConfusion worked_example() {
  GroupedConfusion conf({"a", "b"}, {"neg", "pos"});
  conf.add(0, 1, 1, 8);
  conf.add(0, 1, 0, 2);
  conf.add(0, 0, 1, 2);
  conf.add(0, 0, 0, 8);
  conf.add(1, 1, 1, 9);
  conf.add(1, 1, 0, 1);
  conf.add(1, 0, 1, 1);
  conf.add(1, 0, 0, 9);
  return conf;
}

GroupedConfusion random_table(SeededStream& s, int G, int C, int max_count) {
  std::vector<std::string> groups, classes;
  for (int g = 0; g < G; ++g) groups.push_back("g" + std::to_string(g));
  for (int c = 0; c < C; ++c) classes.push_back("c" + std::to_string(c));
  GroupedConfusion conf(groups, classes);
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < C; ++t)
      for (int p = 0; p < C; ++p)
        conf.add(g, t, p, s.next_below(static_cast<std::uint64_t>(max_count + 1)));
  return conf;
}

}  // namespace

TEST_CASE("identical groups are perfectly fair") {
  GroupedConfusion conf({"a", "b"}, {"x", "y"});
  for (int g = 0; g < 2; ++g) {
    conf.add(g, 0, 0, 5);
    conf.add(g, 0, 1, 2);
    conf.add(g, 1, 0, 1);
    conf.add(g, 1, 1, 7);
  }
  CHECK(f_eod(conf) == doctest::Approx(1.0));
  CHECK(f_eop(conf) == doctest::Approx(1.0));
  CHECK(f_dpa(conf) == doctest::Approx(1.0));
  const auto g = gap_metrics(conf);
  CHECK(g.gap_eop == 0.0);
  CHECK(g.gap_eod == 0.0);
  CHECK(g.gap_dpa == 0.0);
}

TEST_CASE("worked two-group example") {
  const auto conf = worked_example();
  CHECK(f_eod(conf) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f_eop(conf) == doctest::Approx(1.6 / 1.8).epsilon(1e-12));
  CHECK(f_dpa(conf) == doctest::Approx(1.0).epsilon(1e-12));
  const auto g = gap_metrics(conf);
  CHECK(g.gap_eop == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(g.gap_eod == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(g.gap_dpa == doctest::Approx(0.0));

  const auto rep = fairness_report(conf);
  CHECK(rep.f_eod == doctest::Approx(0.5));
  // The minimizing ratio is group b's FPR over group a's.
  CHECK(rep.eod_witness.group_num == 1);
  CHECK(rep.eod_witness.group_den == 0);
}

TEST_CASE("never-predicting group drives ratios to zero") {
  GroupedConfusion conf({"a", "b"}, {"neg", "pos"});
  conf.add(0, 1, 1, 8);
  conf.add(0, 1, 0, 2);
  conf.add(0, 0, 1, 2);
  conf.add(0, 0, 0, 8);
  conf.add(1, 1, 0, 10);  // group b never predicts positive
  conf.add(1, 0, 0, 10);
  CHECK(f_eod(conf) == doctest::Approx(0.0));
  CHECK(f_eop(conf) == doctest::Approx(0.0));
}

TEST_CASE("disjoint predictions give the extreme parity gap") {
  GroupedConfusion conf({"a", "b"}, {"neg", "pos"});
  conf.add(0, 0, 1, 5);
  conf.add(0, 1, 1, 5);
  conf.add(1, 0, 0, 5);
  conf.add(1, 1, 0, 5);
  CHECK(gap_metrics(conf).gap_dpa == doctest::Approx(1.0));
}

TEST_CASE("prediction-rate imbalance example") {
  // Group a predicts class pos at 0.6, group b at 0.3.
  GroupedConfusion conf({"a", "b"}, {"neg", "pos"});
  conf.add(0, 0, 1, 6);
  conf.add(0, 0, 0, 4);
  conf.add(1, 0, 1, 3);
  conf.add(1, 0, 0, 7);
  CHECK(f_dpa(conf) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("empty or undersized tables are rejected") {
  GroupedConfusion conf({"a", "b"}, {"x", "y"});
  CHECK_THROWS_AS(f_eod(conf), ValidationError);  // all-zero table
  GroupedConfusion one_group({"a"}, {"x", "y"});
  one_group.add(0, 0, 0, 3);
  CHECK_THROWS_AS(f_eod(one_group), ValidationError);
  // A populated table with one empty group fails the parity precondition.
  GroupedConfusion empty_group({"a", "b"}, {"x", "y"});
  empty_group.add(0, 0, 0, 3);
  empty_group.add(0, 1, 1, 3);
  CHECK_THROWS_AS(f_dpa(empty_group), ValidationError);
}

TEST_CASE("metrics are invariant to group/class permutations and count scaling") {
  SeededStream s(2025, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto conf = random_table(s, 2, 2, 12);
    std::uint64_t total = 0;
    for (int g = 0; g < 2; ++g) total += conf.group_total(g);
    if (total == 0) continue;

    // Permute both axes.
    GroupedConfusion permuted({"b", "a"}, {"y", "x"});
    for (int g = 0; g < 2; ++g)
      for (int t = 0; t < 2; ++t)
        for (int p = 0; p < 2; ++p) permuted.add(1 - g, 1 - t, 1 - p, conf.at(g, t, p));
    // Duplicate every count.
    GroupedConfusion doubled({"a", "b"}, {"x", "y"});
    for (int g = 0; g < 2; ++g)
      for (int t = 0; t < 2; ++t)
        for (int p = 0; p < 2; ++p) doubled.add(g, t, p, 3 * conf.at(g, t, p));

    CHECK(f_eod(conf) == doctest::Approx(f_eod(permuted)).epsilon(1e-12));
    CHECK(f_eop(conf) == doctest::Approx(f_eop(permuted)).epsilon(1e-12));
    CHECK(f_eod(conf) == doctest::Approx(f_eod(doubled)).epsilon(1e-12));
    CHECK(f_eop(conf) == doctest::Approx(f_eop(doubled)).epsilon(1e-12));
    const auto ga = gap_metrics(conf), gb = gap_metrics(doubled);
    CHECK(ga.gap_eod == doctest::Approx(gb.gap_eod).epsilon(1e-12));
  }
}

TEST_CASE("merging a duplicated group never changes f_dpa") {
  SeededStream s(2026, 0);
  for (int trial = 0; trial < 30; ++trial) {
    auto conf = random_table(s, 2, 2, 10);
    bool any_empty = false;
    for (int g = 0; g < 2; ++g) any_empty = any_empty || conf.group_total(g) == 0;
    if (any_empty) continue;
    // Add a third group identical to group 0.
    GroupedConfusion with_clone({"a", "b", "a2"}, {"x", "y"});
    for (int g = 0; g < 2; ++g)
      for (int t = 0; t < 2; ++t)
        for (int p = 0; p < 2; ++p) with_clone.add(g, t, p, conf.at(g, t, p));
    for (int t = 0; t < 2; ++t)
      for (int p = 0; p < 2; ++p) with_clone.add(2, t, p, conf.at(0, t, p));
    CHECK(f_dpa(conf) == doctest::Approx(f_dpa(with_clone)).epsilon(1e-12));
  }
}

TEST_CASE("brute-force oracle equivalence on random tables") {
  SeededStream s(31415, 0);
  int checked = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const int G = trial % 2 == 0 ? 2 : 3;
    const int C = trial % 2 == 0 ? 2 : 3;
    const auto conf = random_table(s, G, C, 20);
    std::uint64_t total = 0;
    for (int g = 0; g < G; ++g) total += conf.group_total(g);
    if (total == 0) continue;
    const Oracle oracle{G, C, conf};
    CHECK(f_eod(conf) == doctest::Approx(oracle.f_eod()).epsilon(1e-12));
    CHECK(f_eop(conf) == doctest::Approx(oracle.f_eop()).epsilon(1e-12));
    const auto got = gap_metrics(conf);
    const auto want = oracle.gaps();
    CHECK(got.gap_eop == doctest::Approx(want.gap_eop).epsilon(1e-12));
    CHECK(got.gap_eod == doctest::Approx(want.gap_eod).epsilon(1e-12));
    CHECK(got.gap_dpa == doctest::Approx(want.gap_dpa).epsilon(1e-12));
    bool any_empty = false;
    for (int g = 0; g < G; ++g) any_empty = any_empty || conf.group_total(g) == 0;
    if (!any_empty) {
      CHECK(f_dpa(conf) == doctest::Approx(oracle.f_dpa()).epsilon(1e-12));
      ++checked;
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("multilabel entry point folds labels into the class axis") {
  std::vector<LabelConfusion> labels(2);
  labels[0].label = "hat";
  labels[0].counts = {{{8, 2, 2, 8}}, {{9, 1, 1, 9}}};
  labels[1].label = "bag";
  labels[1].counts = {{{5, 5, 0, 10}}, {{5, 5, 0, 10}}};
  const auto rep = multilabel_report({"a", "b"}, labels);
  // Label "hat" reproduces the worked example's FPR ratio.
  CHECK(rep.f_eod == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.gap_eop == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("prediction log ingestion with and without counts") {
  const std::string path = "test_predlog.csv";
  {
    std::ofstream out(path);
    out << "group,true_class,predicted_class\n";
    for (int i = 0; i < 4; ++i) out << "a,pos,pos\n";
    out << "a,pos,neg\nb,pos,pos\nb,neg,neg\n";
  }
  const auto conf = load_prediction_log(path);
  CHECK(conf.group_count() == 2);
  CHECK(conf.class_count() == 2);
  CHECK(conf.at(0, 0, 0) == 4);

  const std::string agg = "test_predlog_agg.csv";
  {
    std::ofstream out(agg);
    out << "group,true_class,predicted_class,count\n";
    out << "a,pos,pos,4\na,pos,neg,1\nb,pos,pos,1\nb,neg,neg,1\n";
  }
  const auto conf2 = load_prediction_log(agg);
  CHECK(conf2.at(0, 0, 0) == 4);
  CHECK(f_eop(conf) == doctest::Approx(f_eop(conf2)).epsilon(1e-12));

  CHECK_THROWS_AS(load_prediction_log("missing_file.csv"), IoError);
  const std::string bad = "test_predlog_bad.csv";
  {
    std::ofstream out(bad);
    out << "group,true_class\na,pos\n";
  }
  CHECK_THROWS_AS(load_prediction_log(bad), IoError);
}

TEST_CASE("smoothing keeps undefined rates finite") {
  GroupedConfusion conf({"a", "b"}, {"x", "y"});
  conf.add(0, 0, 0, 5);
  conf.add(1, 0, 0, 5);  // class y has no true samples anywhere
  MetricOptions opt;
  opt.smoothing_alpha = 1.0;
  CHECK(f_eod(conf, opt) == doctest::Approx(1.0));
}
