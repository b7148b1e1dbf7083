#pragma once

#include <cstdint>
#include <vector>

#include "optfair/errors.hpp"

namespace optfair {

// Fixed-width histogram over the half-open range [lo, hi). Values outside the
// range go to out_of_range_count, so sum(counts) + out_of_range_count == total.
class Histogram {
 public:
  Histogram(double lo, double hi, int bin_count);

  void add(double x);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int bin_count() const { return static_cast<int>(counts_.size()); }
  double bin_width() const { return (hi_ - lo_) / static_cast<double>(counts_.size()); }
  std::uint64_t count(int bin) const { return counts_.at(static_cast<std::size_t>(bin)); }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t out_of_range_count() const { return out_of_range_; }
  std::uint64_t total() const { return total_; }

  double bin_center(int bin) const { return lo_ + (bin + 0.5) * bin_width(); }

 private:
  double lo_;
  double hi_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t out_of_range_ = 0;
  std::uint64_t total_ = 0;
};

}  // namespace optfair
