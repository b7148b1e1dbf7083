#include "optfair/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace optfair {

void SyntheticSpec::validate() const {
  if (n_samples <= 0) throw ValidationError("synthetic: n_samples must be positive");
  if (n_features <= 0) throw ValidationError("synthetic: n_features must be positive");
  if (!(minority_fraction > 0.0 && minority_fraction <= 0.5))
    throw ValidationError("synthetic: minority_fraction must lie in (0, 0.5]");
  if (!group_mean_0.empty() && group_mean_0.size() != static_cast<std::size_t>(n_features))
    throw ValidationError("synthetic: group_mean_0 size mismatch");
  if (!group_mean_1.empty() && group_mean_1.size() != static_cast<std::size_t>(n_features))
    throw ValidationError("synthetic: group_mean_1 size mismatch");
  if (!(label_flip_0 >= 0.0 && label_flip_0 < 0.5) || !(label_flip_1 >= 0.0 && label_flip_1 < 0.5))
    throw ValidationError("synthetic: label flips must lie in [0, 0.5)");
  if (!(class_balance > 0.0 && class_balance < 1.0))
    throw ValidationError("synthetic: class_balance must lie in (0,1)");
}

void TabularDataset::validate() const {
  if (labels.empty()) throw ValidationError("dataset: empty");
  if (features.size() != labels.size() * static_cast<std::size_t>(n_features))
    throw ValidationError("dataset: feature matrix shape mismatch");
  if (groups.size() != labels.size()) throw ValidationError("dataset: group column mismatch");
  for (int y : labels)
    if (y < 0 || y >= n_classes) throw ValidationError("dataset: label out of range");
  for (int g : groups)
    if (g < 0 || g >= n_groups) throw ValidationError("dataset: group out of range");
}

TabularDataset generate_synthetic(const SyntheticSpec& spec, SeededStream& stream) {
  spec.validate();
  const long n = spec.n_samples;
  const int d = spec.n_features;
  const long n_minority = std::lround(spec.minority_fraction * static_cast<double>(n));

  TabularDataset data;
  data.n_features = d;
  data.group_names = {"g0", "g1"};
  data.class_names = {"0", "1"};

  // Exact group sizes, then a seeded shuffle of the assignment.
  data.groups.assign(static_cast<std::size_t>(n), 1);
  for (long i = 0; i < n_minority; ++i) data.groups[static_cast<std::size_t>(i)] = 0;
  for (long i = n - 1; i > 0; --i) {
    const auto j = static_cast<long>(stream.next_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(data.groups[static_cast<std::size_t>(i)], data.groups[static_cast<std::size_t>(j)]);
  }

  const std::vector<double> zeros(static_cast<std::size_t>(d), 0.0);
  const auto& mean0 = spec.group_mean_0.empty() ? zeros : spec.group_mean_0;
  const auto& mean1 = spec.group_mean_1.empty() ? zeros : spec.group_mean_1;

  data.features.resize(static_cast<std::size_t>(n) * d);
  std::vector<double> scores(static_cast<std::size_t>(n));
  const double u = 1.0 / std::sqrt(static_cast<double>(d));  // shared score direction
  for (long i = 0; i < n; ++i) {
    const auto& mean = data.groups[static_cast<std::size_t>(i)] == 0 ? mean0 : mean1;
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double x = stream.next_gaussian(mean[static_cast<std::size_t>(j)], 1.0);
      data.features[static_cast<std::size_t>(i) * d + j] = x;
      s += u * x;
    }
    scores[static_cast<std::size_t>(i)] = s;
  }

  // Threshold at the empirical (1 - class_balance) quantile of the scores.
  std::vector<double> sorted(scores);
  std::sort(sorted.begin(), sorted.end());
  auto cut = static_cast<long>(std::llround((1.0 - spec.class_balance) * static_cast<double>(n)));
  cut = std::clamp(cut, 1L, n);
  const double threshold = sorted[static_cast<std::size_t>(cut - 1)];

  data.labels.resize(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    int y = scores[static_cast<std::size_t>(i)] > threshold ? 1 : 0;
    const double flip =
        data.groups[static_cast<std::size_t>(i)] == 0 ? spec.label_flip_0 : spec.label_flip_1;
    if (flip > 0.0 && stream.next_bernoulli(flip)) y = 1 - y;
    data.labels[static_cast<std::size_t>(i)] = y;
  }
  data.validate();
  return data;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

int intern(std::vector<std::string>& vocab, const std::string& name) {
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (vocab[i] == name) return static_cast<int>(i);
  vocab.push_back(name);
  return static_cast<int>(vocab.size() - 1);
}

}  // namespace

TabularDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open " + path);

  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_line(line);
    break;
  }
  if (header.empty()) throw IoError("load_csv: " + path + " is empty");

  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int label_col = find_col(schema.label_column);
  if (label_col < 0)
    throw IoError("load_csv: " + path + " missing label column '" + schema.label_column + "'");
  const int group_col = find_col(schema.group_column);
  if (group_col < 0)
    throw IoError("load_csv: " + path + " missing group column '" + schema.group_column + "'");

  std::vector<int> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (static_cast<int>(i) != label_col && static_cast<int>(i) != group_col)
        feature_cols.push_back(static_cast<int>(i));
  } else {
    for (const auto& name : schema.feature_columns) {
      const int c = find_col(name);
      if (c < 0) throw IoError("load_csv: " + path + " missing feature column '" + name + "'");
      feature_cols.push_back(c);
    }
  }
  if (feature_cols.empty()) throw IoError("load_csv: " + path + " has no feature columns");

  TabularDataset data;
  data.n_features = static_cast<int>(feature_cols.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw IoError("load_csv: " + path + " line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, found " +
                    std::to_string(fields.size()));
    for (int c : feature_cols) {
      const std::string& cell = fields[static_cast<std::size_t>(c)];
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty() || !std::isfinite(x))
        throw IoError("load_csv: " + path + " line " + std::to_string(line_no) + " column '" +
                      header[static_cast<std::size_t>(c)] + "': non-numeric cell '" + cell + "'");
      data.features.push_back(x);
    }
    data.labels.push_back(intern(data.class_names, fields[static_cast<std::size_t>(label_col)]));
    data.groups.push_back(intern(data.group_names, fields[static_cast<std::size_t>(group_col)]));
  }
  if (data.labels.empty()) throw IoError("load_csv: " + path + " has no data rows");
  data.n_classes = std::max<int>(2, static_cast<int>(data.class_names.size()));
  data.n_groups = std::max<int>(1, static_cast<int>(data.group_names.size()));
  while (static_cast<int>(data.class_names.size()) < data.n_classes)
    data.class_names.push_back("class" + std::to_string(data.class_names.size()));

  // Flag constant feature columns; standardization will zero them out.
  for (int j = 0; j < data.n_features; ++j) {
    const double first = data.feature(0, j);
    bool constant = true;
    for (long i = 1; i < data.n() && constant; ++i) constant = data.feature(i, j) == first;
    if (constant)
      data.warnings.push_back("feature column '" +
                              header[static_cast<std::size_t>(feature_cols[j])] +
                              "' is constant; standardized to zero");
  }
  data.validate();
  return data;
}

}  // namespace optfair
