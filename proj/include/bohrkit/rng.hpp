#pragma once

#include <cstdint>

namespace bohrkit::rng {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Key of an independent stream identified by (seed, id). Used for per-sample
// and per-task streams so that draws never depend on the schedule.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t id) {
  return mix64(mix64(seed + kGamma) ^ mix64(id * kGamma + 0x632be59bd9b4e019ULL));
}

// k-th draw of a stream: counter-based, random access.
inline std::uint64_t draw(std::uint64_t key, std::uint64_t k) { return mix64(key + (k + 1) * kGamma); }

inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Sequential view of one stream.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}
  std::uint64_t next_u64() { return draw(key_, counter_++); }
  double uniform() { return to_unit(next_u64()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bohrkit::rng
