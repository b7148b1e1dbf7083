#pragma once

#include <cstdint>

#include "optfair/errors.hpp"

namespace optfair {

// Counter-based deterministic random stream. Each (master_seed, stream_index)
// pair is an independent SplitMix64 sequence, so per-trial streams need no
// shared state and results do not depend on worker scheduling.
class SeededStream {
 public:
  SeededStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double next_uniform();

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound);

  bool next_bernoulli(double p);

  double next_gaussian(double mean, double stddev);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// One draw from N(mean, stddev^2). stddev = 0 returns mean exactly.
double gaussian(SeededStream& stream, double mean, double stddev);

}  // namespace optfair
