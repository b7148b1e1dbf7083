#pragma once

#include <span>
#include <vector>

#include "optfair/errors.hpp"

namespace optfair {

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-) over the signed ranks
  double p_value = 1.0;    // two-sided
  int n_used = 0;          // pairs remaining after dropping zero differences
  bool exact = false;      // which path produced p_value
};

// Paired two-sided signed-rank test. Zero differences are dropped, tied
// absolute differences get midranks. Exact null distribution (all 2^n sign
// assignments) for n <= exact_limit, normal approximation with continuity
// correction and tie-corrected variance otherwise.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> paired_a,
                                    std::span<const double> paired_b,
                                    WilcoxonMethod method = WilcoxonMethod::Auto,
                                    int exact_limit = 20);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace optfair
