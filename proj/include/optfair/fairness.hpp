#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "optfair/errors.hpp"

namespace optfair {

// Per-(group, true class, predicted class) counts; the sole input to all
// fairness metrics.
class GroupedConfusion {
 public:
  GroupedConfusion(std::vector<std::string> groups, std::vector<std::string> classes);

  void add(int group, int true_class, int predicted_class, std::uint64_t n = 1);
  std::uint64_t at(int group, int true_class, int predicted_class) const;

  int group_count() const { return static_cast<int>(groups_.size()); }
  int class_count() const { return static_cast<int>(classes_.size()); }
  const std::vector<std::string>& groups() const { return groups_; }
  const std::vector<std::string>& classes() const { return classes_; }

  std::uint64_t group_total(int group) const;

  // Labelled record ingestion; group/class vocabularies grow in first-seen order.
  static GroupedConfusion from_records(
      const std::vector<std::tuple<std::string, std::string, std::string, std::uint64_t>>& records);

 private:
  std::size_t index(int g, int t, int p) const;
  std::vector<std::string> groups_;
  std::vector<std::string> classes_;
  std::vector<std::uint64_t> counts_;
};

struct MetricOptions {
  double smoothing_alpha = 0.0;          // optional add-alpha smoothing of rates
  bool eop_missing_class_as_zero = false;  // count a group's missing-class TPR as 0
};

struct RatioWitness {
  int class_index = -1;  // -1 when not class-specific or no comparison applied
  int group_num = -1;    // numerator group
  int group_den = -1;    // denominator group
};

struct FairnessReport {
  double f_eod = 1.0;
  double f_eop = 1.0;
  double f_dpa = 1.0;
  double gap_eod = 0.0;
  double gap_eop = 0.0;
  double gap_dpa = 0.0;
  RatioWitness eod_witness;
  RatioWitness eop_witness;
  RatioWitness dpa_witness;
};

// Conditional rates per (group, class); nullopt when the conditioning event
// has no samples.
std::optional<double> true_positive_rate(const GroupedConfusion& conf, int group, int cls,
                                         const MetricOptions& opt = {});
std::optional<double> false_positive_rate(const GroupedConfusion& conf, int group, int cls,
                                          const MetricOptions& opt = {});
std::optional<double> prediction_rate(const GroupedConfusion& conf, int group, int cls,
                                      const MetricOptions& opt = {});

double f_eod(const GroupedConfusion& conf, const MetricOptions& opt = {});
double f_eop(const GroupedConfusion& conf, const MetricOptions& opt = {});
double f_dpa(const GroupedConfusion& conf, const MetricOptions& opt = {});

struct GapMetrics {
  double gap_eop = 0.0;
  double gap_eod = 0.0;
  double gap_dpa = 0.0;
};

GapMetrics gap_metrics(const GroupedConfusion& conf, const MetricOptions& opt = {});

FairnessReport fairness_report(const GroupedConfusion& conf, const MetricOptions& opt = {});

// Multi-label inputs: one binary confusion per label, folded into the class
// axis (per-label TPR/FPR/prediction rates feed the same min/gap reductions).
struct LabelConfusion {
  std::string label;
  // counts[group] = {tp, fn, fp, tn}
  std::vector<std::array<std::uint64_t, 4>> counts;
};

FairnessReport multilabel_report(const std::vector<std::string>& groups,
                                 const std::vector<LabelConfusion>& labels,
                                 const MetricOptions& opt = {});

// Prediction-log ingestion. Columns (group, true_class, predicted_class) with
// an optional trailing count column; header row required.
GroupedConfusion load_prediction_log(const std::string& path);

}  // namespace optfair
