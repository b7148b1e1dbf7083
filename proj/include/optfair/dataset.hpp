#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optfair/errors.hpp"
#include "optfair/rng.hpp"

namespace optfair {

// Biased two-group binary classification data. Group 0 is the minority; its
// size is round(minority_fraction * n_samples) exactly. Features are Gaussian
// around per-group means; labels threshold a shared linear score at the
// empirical class_balance quantile, then get per-group flip noise.
struct SyntheticSpec {
  long n_samples = 2000;
  int n_features = 4;
  double minority_fraction = 0.2;
  std::vector<double> group_mean_0;  // sized n_features; defaults to zeros
  std::vector<double> group_mean_1;
  double label_flip_0 = 0.0;
  double label_flip_1 = 0.0;
  double class_balance = 0.5;
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct TabularDataset {
  std::vector<double> features;  // row-major, n x d
  std::vector<int> labels;
  std::vector<int> groups;
  int n_features = 0;
  int n_classes = 2;
  int n_groups = 2;
  std::vector<std::string> class_names;
  std::vector<std::string> group_names;
  std::vector<std::string> warnings;

  long n() const { return static_cast<long>(labels.size()); }
  int d() const { return n_features; }
  double feature(long row, int col) const {
    return features[static_cast<std::size_t>(row) * n_features + col];
  }
  void validate() const;
};

TabularDataset generate_synthetic(const SyntheticSpec& spec, SeededStream& stream);

struct CsvSchema {
  std::vector<std::string> feature_columns;  // empty: every other column is a feature
  std::string label_column = "label";
  std::string group_column = "group";
};

// Numeric-feature CSV with a header row. Label and group values may be
// arbitrary strings; they are encoded in first-seen order.
TabularDataset load_csv(const std::string& path, const CsvSchema& schema);

}  // namespace optfair
