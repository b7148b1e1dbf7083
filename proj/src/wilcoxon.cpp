#include "optfair/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace optfair {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Midranks of |d|, doubled so ties of .5 stay exact integers.
std::vector<std::int64_t> doubled_midranks(const std::vector<double>& abs_d) {
  const std::size_t n = abs_d.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return abs_d[a] < abs_d[b]; });

  std::vector<std::int64_t> ranks2(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    // Positions i..j share rank (i+1 + j+1)/2; doubled: (i + j + 2).
    const std::int64_t r2 = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks2[order[k]] = r2;
    i = j + 1;
  }
  return ranks2;
}

// Exact distribution of 2*W+ over all sign assignments, counted by a
// subset-sum table (identical to enumerating the 2^n assignments).
double exact_two_sided_p(const std::vector<std::int64_t>& ranks2, std::int64_t w2_obs) {
  std::int64_t total2 = 0;
  for (auto r : ranks2) total2 += r;
  std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
  count[0] = 1.0;
  std::int64_t reach = 0;
  for (auto r : ranks2) {
    reach += r;
    for (std::int64_t s = reach; s >= r; --s)
      count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r)];
  }
  const double denom = std::ldexp(1.0, static_cast<int>(ranks2.size()));
  double lower = 0.0, upper = 0.0;
  for (std::int64_t s = 0; s <= total2; ++s) {
    if (s <= w2_obs) lower += count[static_cast<std::size_t>(s)];
    if (s >= w2_obs) upper += count[static_cast<std::size_t>(s)];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / denom);
}

// CDF with a second-order Edgeworth term; the signed-rank sum is symmetric,
// so only the (negative) excess kurtosis enters.
double edgeworth_cdf(double z, double gamma2) {
  const double phi = std::exp(-0.5 * z * z) / std::sqrt(8.0 * std::atan(1.0));
  const double f = normal_cdf(z) - phi * (gamma2 / 24.0) * (z * z * z - 3.0 * z);
  return std::clamp(f, 0.0, 1.0);
}

double normal_two_sided_p(const std::vector<std::int64_t>& ranks2, double w_plus) {
  // Moments computed from the midranks directly; ties need no extra handling.
  double mean = 0.0, var = 0.0, kappa4 = 0.0;
  for (auto r2 : ranks2) {
    const double r = 0.5 * static_cast<double>(r2);
    mean += r / 2.0;
    var += r * r / 4.0;
    kappa4 -= r * r * r * r / 8.0;
  }
  if (var <= 0.0) return 1.0;
  const double sigma = std::sqrt(var);
  const double gamma2 = kappa4 / (var * var);
  const double upper = 1.0 - edgeworth_cdf((w_plus - mean - 0.5) / sigma, gamma2);
  const double lower = edgeworth_cdf((w_plus - mean + 0.5) / sigma, gamma2);
  return std::clamp(2.0 * std::min(upper, lower), 0.0, 1.0);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> paired_a,
                                    std::span<const double> paired_b,
                                    WilcoxonMethod method, int exact_limit) {
  if (paired_a.size() != paired_b.size())
    throw InsufficientDataError("wilcoxon: paired samples have different lengths");

  std::vector<double> diffs;
  diffs.reserve(paired_a.size());
  for (std::size_t i = 0; i < paired_a.size(); ++i) {
    const double d = paired_a[i] - paired_b[i];
    if (!std::isfinite(d)) throw ValidationError("wilcoxon: non-finite difference");
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.size() < 5)
    throw InsufficientDataError("wilcoxon: fewer than 5 nonzero differences");

  std::vector<double> abs_d(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) abs_d[i] = std::fabs(diffs[i]);
  const auto ranks2 = doubled_midranks(abs_d);

  std::int64_t w2_plus = 0, w2_minus = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (diffs[i] > 0.0)
      w2_plus += ranks2[i];
    else
      w2_minus += ranks2[i];
  }

  WilcoxonResult out;
  out.n_used = static_cast<int>(diffs.size());
  out.statistic = 0.5 * static_cast<double>(std::min(w2_plus, w2_minus));
  out.exact = method == WilcoxonMethod::Exact ||
              (method == WilcoxonMethod::Auto && out.n_used <= exact_limit);
  out.p_value = out.exact ? exact_two_sided_p(ranks2, w2_plus)
                          : normal_two_sided_p(ranks2, 0.5 * static_cast<double>(w2_plus));
  return out;
}

}  // namespace optfair
