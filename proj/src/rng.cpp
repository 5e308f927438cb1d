#include "sdjls/rng.hpp"

namespace sdjls {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return splitmix64(seed_ + counter_ * kGolden);
}

double RngStream::uniform() {
  // 53 random bits centred in their bucket: never exactly 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index * kGolden + 0x632BE59BD9B4E019ULL));
}

}  // namespace sdjls
