#include "optfair/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace optfair {

GroupedConfusion::GroupedConfusion(std::vector<std::string> groups,
                                   std::vector<std::string> classes)
    : groups_(std::move(groups)), classes_(std::move(classes)) {
  if (groups_.empty() || classes_.empty())
    throw ValidationError("confusion: need at least one group and one class");
  counts_.assign(groups_.size() * classes_.size() * classes_.size(), 0);
}

std::size_t GroupedConfusion::index(int g, int t, int p) const {
  if (g < 0 || g >= group_count() || t < 0 || t >= class_count() || p < 0 || p >= class_count())
    throw ValidationError("confusion: index out of range");
  const auto c = static_cast<std::size_t>(class_count());
  return (static_cast<std::size_t>(g) * c + static_cast<std::size_t>(t)) * c +
         static_cast<std::size_t>(p);
}

void GroupedConfusion::add(int group, int true_class, int predicted_class, std::uint64_t n) {
  counts_[index(group, true_class, predicted_class)] += n;
}

std::uint64_t GroupedConfusion::at(int group, int true_class, int predicted_class) const {
  return counts_[index(group, true_class, predicted_class)];
}

std::uint64_t GroupedConfusion::group_total(int group) const {
  std::uint64_t total = 0;
  for (int t = 0; t < class_count(); ++t)
    for (int p = 0; p < class_count(); ++p) total += at(group, t, p);
  return total;
}

GroupedConfusion GroupedConfusion::from_records(
    const std::vector<std::tuple<std::string, std::string, std::string, std::uint64_t>>& records) {
  if (records.empty()) throw ValidationError("confusion: no records");
  std::vector<std::string> groups, classes;
  auto intern = [](std::vector<std::string>& vocab, const std::string& name) {
    for (std::size_t i = 0; i < vocab.size(); ++i)
      if (vocab[i] == name) return static_cast<int>(i);
    vocab.push_back(name);
    return static_cast<int>(vocab.size() - 1);
  };
  struct Row {
    int g, t, p;
    std::uint64_t n;
  };
  std::vector<Row> rows;
  rows.reserve(records.size());
  for (const auto& [g, t, p, n] : records)
    rows.push_back({intern(groups, g), intern(classes, t), intern(classes, p), n});
  GroupedConfusion conf(std::move(groups), std::move(classes));
  for (const auto& r : rows) conf.add(r.g, r.t, r.p, r.n);
  return conf;
}

namespace {

// Conditional rate with optional add-alpha smoothing; nullopt when the
// conditioning event has no mass.
std::optional<double> smoothed_rate(double num, double den, double alpha) {
  if (den + 2.0 * alpha <= 0.0) return std::nullopt;
  return (num + alpha) / (den + 2.0 * alpha);
}

using RateTable = std::vector<std::vector<std::optional<double>>>;  // [class][group]

struct RateTables {
  RateTable tpr;
  RateTable fpr;
  RateTable pred;
  int groups = 0;
  int classes = 0;
};

RateTables build_tables(const GroupedConfusion& conf, const MetricOptions& opt) {
  const int G = conf.group_count(), C = conf.class_count();
  RateTables tab;
  tab.groups = G;
  tab.classes = C;
  tab.tpr.assign(C, std::vector<std::optional<double>>(G));
  tab.fpr.assign(C, std::vector<std::optional<double>>(G));
  tab.pred.assign(C, std::vector<std::optional<double>>(G));
  for (int g = 0; g < G; ++g) {
    const double total = static_cast<double>(conf.group_total(g));
    for (int c = 0; c < C; ++c) {
      double pos_hit = static_cast<double>(conf.at(g, c, c));
      double pos_total = 0.0, neg_hit = 0.0, neg_total = 0.0, predicted = 0.0;
      for (int p = 0; p < C; ++p) pos_total += static_cast<double>(conf.at(g, c, p));
      for (int t = 0; t < C; ++t) {
        predicted += static_cast<double>(conf.at(g, t, c));
        if (t == c) continue;
        neg_hit += static_cast<double>(conf.at(g, t, c));
        for (int p = 0; p < C; ++p) neg_total += static_cast<double>(conf.at(g, t, p));
      }
      tab.tpr[c][g] = smoothed_rate(pos_hit, pos_total, opt.smoothing_alpha);
      tab.fpr[c][g] = smoothed_rate(neg_hit, neg_total, opt.smoothing_alpha);
      tab.pred[c][g] = smoothed_rate(predicted, total, opt.smoothing_alpha);
    }
  }
  return tab;
}

// Ratio convention: 0/0 pairs carry no evidence of disparity and yield 1;
// x/0 with x > 0 is skipped, because the reverse ordered pair contributes 0.
std::optional<double> ratio_convention(double num, double den) {
  if (den == 0.0) {
    if (num == 0.0) return 1.0;
    return std::nullopt;
  }
  return num / den;
}

struct MinResult {
  double value = 1.0;
  RatioWitness witness;
};

// min over classes and ordered group pairs of rate(i,j)/rate(i,q); undefined
// rates are skipped, and an empty comparison set yields 1.
MinResult min_rate_ratio(const std::vector<const RateTable*>& tables, int classes, int groups) {
  MinResult best;
  bool any = false;
  for (const auto* table : tables) {
    for (int c = 0; c < classes; ++c) {
      for (int j = 0; j < groups; ++j) {
        for (int q = 0; q < groups; ++q) {
          if (j == q) continue;
          const auto& a = (*table)[c][j];
          const auto& b = (*table)[c][q];
          if (!a || !b) continue;
          const auto r = ratio_convention(*a, *b);
          if (!r) continue;
          if (!any || *r < best.value) {
            best.value = *r;
            best.witness = {c, j, q};
            any = true;
          }
        }
      }
    }
  }
  if (!any) best.value = 1.0;
  return best;
}

double max_rate_gap(const RateTable& table, int classes, int groups) {
  double gap = 0.0;
  for (int c = 0; c < classes; ++c)
    for (int j = 0; j < groups; ++j)
      for (int q = j + 1; q < groups; ++q) {
        const auto& a = table[c][j];
        const auto& b = table[c][q];
        if (!a || !b) continue;
        gap = std::max(gap, std::fabs(*a - *b));
      }
  return gap;
}

MinResult eop_from_tables(const RateTables& tab, const MetricOptions& opt) {
  MinResult best;
  bool any = false;
  for (int i = 0; i < tab.groups; ++i) {
    for (int j = 0; j < tab.groups; ++j) {
      if (i == j) continue;
      double sum_i = 0.0, sum_j = 0.0;
      bool shared = false;
      for (int c = 0; c < tab.classes; ++c) {
        const auto& a = tab.tpr[c][i];
        const auto& b = tab.tpr[c][j];
        if (opt.eop_missing_class_as_zero) {
          sum_i += a.value_or(0.0);
          sum_j += b.value_or(0.0);
          shared = true;
        } else if (a && b) {
          // A class missing from either group is excluded from both sums.
          sum_i += *a;
          sum_j += *b;
          shared = true;
        }
      }
      if (!shared) continue;
      const auto r = ratio_convention(sum_i, sum_j);
      if (!r) continue;
      if (!any || *r < best.value) {
        best.value = *r;
        best.witness = {-1, i, j};
        any = true;
      }
    }
  }
  if (!any) best.value = 1.0;
  return best;
}

void validate_table(const GroupedConfusion& conf, bool require_nonempty_groups) {
  if (conf.group_count() < 2 || conf.class_count() < 2)
    throw ValidationError("fairness metrics: need at least 2 groups and 2 classes");
  std::uint64_t total = 0;
  for (int g = 0; g < conf.group_count(); ++g) {
    const auto gt = conf.group_total(g);
    if (require_nonempty_groups && gt == 0)
      throw ValidationError("fairness metrics: group '" + conf.groups()[g] + "' has no samples");
    total += gt;
  }
  if (total == 0) throw ValidationError("fairness metrics: empty table");
}

GapMetrics gaps_from_tables(const RateTables& tab) {
  GapMetrics g;
  g.gap_eop = max_rate_gap(tab.tpr, tab.classes, tab.groups);
  g.gap_dpa = max_rate_gap(tab.pred, tab.classes, tab.groups);
  g.gap_eod = std::max(max_rate_gap(tab.tpr, tab.classes, tab.groups),
                       max_rate_gap(tab.fpr, tab.classes, tab.groups));
  return g;
}

FairnessReport report_from_tables(const RateTables& tab, const MetricOptions& opt) {
  FairnessReport rep;
  const auto eod = min_rate_ratio({&tab.tpr, &tab.fpr}, tab.classes, tab.groups);
  rep.f_eod = eod.value;
  rep.eod_witness = eod.witness;
  const auto eop = eop_from_tables(tab, opt);
  rep.f_eop = eop.value;
  rep.eop_witness = eop.witness;
  const auto dpa = min_rate_ratio({&tab.pred}, tab.classes, tab.groups);
  rep.f_dpa = dpa.value;
  rep.dpa_witness = dpa.witness;
  const auto gaps = gaps_from_tables(tab);
  rep.gap_eop = gaps.gap_eop;
  rep.gap_eod = gaps.gap_eod;
  rep.gap_dpa = gaps.gap_dpa;
  return rep;
}

}  // namespace

std::optional<double> true_positive_rate(const GroupedConfusion& conf, int group, int cls,
                                         const MetricOptions& opt) {
  return build_tables(conf, opt).tpr[cls][group];
}

std::optional<double> false_positive_rate(const GroupedConfusion& conf, int group, int cls,
                                          const MetricOptions& opt) {
  return build_tables(conf, opt).fpr[cls][group];
}

std::optional<double> prediction_rate(const GroupedConfusion& conf, int group, int cls,
                                      const MetricOptions& opt) {
  return build_tables(conf, opt).pred[cls][group];
}

double f_eod(const GroupedConfusion& conf, const MetricOptions& opt) {
  validate_table(conf, false);
  const auto tab = build_tables(conf, opt);
  return min_rate_ratio({&tab.tpr, &tab.fpr}, tab.classes, tab.groups).value;
}

double f_eop(const GroupedConfusion& conf, const MetricOptions& opt) {
  validate_table(conf, false);
  const auto tab = build_tables(conf, opt);
  return eop_from_tables(tab, opt).value;
}

double f_dpa(const GroupedConfusion& conf, const MetricOptions& opt) {
  validate_table(conf, true);
  const auto tab = build_tables(conf, opt);
  return min_rate_ratio({&tab.pred}, tab.classes, tab.groups).value;
}

GapMetrics gap_metrics(const GroupedConfusion& conf, const MetricOptions& opt) {
  validate_table(conf, false);
  return gaps_from_tables(build_tables(conf, opt));
}

FairnessReport fairness_report(const GroupedConfusion& conf, const MetricOptions& opt) {
  validate_table(conf, true);
  return report_from_tables(build_tables(conf, opt), opt);
}

FairnessReport multilabel_report(const std::vector<std::string>& groups,
                                 const std::vector<LabelConfusion>& labels,
                                 const MetricOptions& opt) {
  if (groups.size() < 2) throw ValidationError("multilabel: need at least 2 groups");
  if (labels.empty()) throw ValidationError("multilabel: no labels");
  RateTables tab;
  tab.groups = static_cast<int>(groups.size());
  tab.classes = static_cast<int>(labels.size());
  tab.tpr.assign(tab.classes, std::vector<std::optional<double>>(tab.groups));
  tab.fpr.assign(tab.classes, std::vector<std::optional<double>>(tab.groups));
  tab.pred.assign(tab.classes, std::vector<std::optional<double>>(tab.groups));
  for (int c = 0; c < tab.classes; ++c) {
    if (labels[c].counts.size() != groups.size())
      throw ValidationError("multilabel: label '" + labels[c].label +
                            "' has wrong group arity");
    for (int g = 0; g < tab.groups; ++g) {
      const auto& [tp, fn, fp, tn] = labels[c].counts[g];
      const double tpd = static_cast<double>(tp), fnd = static_cast<double>(fn),
                   fpd = static_cast<double>(fp), tnd = static_cast<double>(tn);
      tab.tpr[c][g] = smoothed_rate(tpd, tpd + fnd, opt.smoothing_alpha);
      tab.fpr[c][g] = smoothed_rate(fpd, fpd + tnd, opt.smoothing_alpha);
      tab.pred[c][g] = smoothed_rate(tpd + fpd, tpd + fnd + fpd + tnd, opt.smoothing_alpha);
    }
  }
  return report_from_tables(tab, opt);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace.
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

GroupedConfusion load_prediction_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("prediction log: cannot open " + path);
  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int gi = col("group"), ti = col("true_class"), pi = col("predicted_class");
  const int ci = col("count");
  if (gi < 0 || ti < 0 || pi < 0)
    throw IoError("prediction log: " + path +
                  " must have header columns group,true_class,predicted_class");

  std::vector<std::tuple<std::string, std::string, std::string, std::uint64_t>> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    const auto need = static_cast<std::size_t>(std::max({gi, ti, pi, ci}) + 1);
    if (fields.size() < need)
      throw IoError("prediction log: " + path + " line " + std::to_string(line_no) +
                    ": expected at least " + std::to_string(need) + " fields");
    std::uint64_t n = 1;
    if (ci >= 0) {
      try {
        n = std::stoull(fields[static_cast<std::size_t>(ci)]);
      } catch (const std::exception&) {
        throw IoError("prediction log: " + path + " line " + std::to_string(line_no) +
                      ": count is not a non-negative integer");
      }
    }
    records.emplace_back(fields[static_cast<std::size_t>(gi)],
                         fields[static_cast<std::size_t>(ti)],
                         fields[static_cast<std::size_t>(pi)], n);
  }
  if (records.empty()) throw IoError("prediction log: " + path + " has no data rows");
  return GroupedConfusion::from_records(records);
}

}  // namespace optfair
