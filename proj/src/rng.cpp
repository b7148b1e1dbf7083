#include "optfair/rng.hpp"

#include <cmath>
#include <numbers>

namespace optfair {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SeededStream::SeededStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {
  state_ = mix64(mix64(master_seed + kGolden) ^ (kGolden * (stream_index + 1)));
}

std::uint64_t SeededStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double SeededStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw ValidationError("next_below: bound must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

bool SeededStream::next_bernoulli(double p) { return next_uniform() < p; }

double SeededStream::next_gaussian(double mean, double stddev) {
  if (stddev < 0.0 || !std::isfinite(stddev))
    throw ValidationError("gaussian: stddev must be finite and non-negative");
  if (stddev == 0.0) return mean;
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  // Box-Muller; u1 shifted into (0, 1] so the log is finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return mean + stddev * r * std::cos(a);
}

double gaussian(SeededStream& stream, double mean, double stddev) {
  return stream.next_gaussian(mean, stddev);
}

}  // namespace optfair
