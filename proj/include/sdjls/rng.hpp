#pragma once

#include <cstdint>

namespace sdjls {

/// Counter-based stream: the k-th draw is splitmix64(seed + k * golden).
/// Draws depend only on (seed, counter), so per-path streams derived with
/// derive_seed are independent of execution order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `index` under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace sdjls
