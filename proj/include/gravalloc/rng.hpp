#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace gravalloc {

// Counter-based generator: output i is a keyed bijective mix of i, so any
// sub-stream can be reconstructed from (seed, replica, tag) alone.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t replica, std::string_view tag);
  explicit Stream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Child stream; does not disturb this stream's counter.
  Stream split(std::uint64_t index) const { return Stream(mix(key_ ^ mix(index + 0x632BE59BD9B4E019ULL))); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t hash_tag(std::string_view tag);

}  // namespace gravalloc
