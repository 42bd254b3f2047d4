#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gmrf {

std::uint64_t splitmix64(std::uint64_t x);

/// Sub-stream seed for (master seed, purpose tag, index). Every Monte Carlo
/// replicate draws from its own stream, so results do not depend on how
/// replicates are scheduled over threads.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::string_view tag, std::uint64_t index)
      : engine_(derive_seed(master, tag, index)) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace gmrf
