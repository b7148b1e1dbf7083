#include "optfair/histogram.hpp"

#include <cmath>

namespace optfair {

Histogram::Histogram(double lo, double hi, int bin_count) : lo_(lo), hi_(hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || !(hi > lo))
    throw ValidationError("histogram: need finite lo < hi");
  if (bin_count <= 0) throw ValidationError("histogram: bin_count must be positive");
  counts_.assign(static_cast<std::size_t>(bin_count), 0);
}

void Histogram::add(double x) {
  ++total_;
  if (!(x >= lo_ && x < hi_)) {  // NaN lands out of range too
    ++out_of_range_;
    return;
  }
  auto idx = static_cast<std::size_t>((x - lo_) / bin_width());
  if (idx >= counts_.size()) idx = counts_.size() - 1;  // guard edge rounding
  ++counts_[idx];
}

}  // namespace optfair
