#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace deidkit {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t v);

/// Per-document seed, independent of processing order.
inline std::uint64_t derive_seed(std::uint64_t corpus_seed, std::string_view doc_id) {
  return splitmix64(corpus_seed ^ fnv1a(doc_id));
}

}  // namespace deidkit
