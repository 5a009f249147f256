#include "gravalloc/rng.hpp"

namespace gravalloc {

std::uint64_t Stream::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_tag(std::string_view tag) {
  // FNV-1a
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Stream::Stream(std::uint64_t seed, std::uint64_t replica, std::string_view tag)
    : key_(mix(mix(seed ^ 0xD1B54A32D192ED03ULL) + mix(replica + 0x8CB92BA72F3D8DD7ULL) + hash_tag(tag))) {}

}  // namespace gravalloc
