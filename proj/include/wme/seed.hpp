#pragma once

#include <cstdint>
#include <string_view>

namespace wme {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Child seed for a named component: every random stream in a run derives
/// from the single run seed through this rule.
inline std::uint64_t child_seed(std::uint64_t parent, std::string_view component) {
  return splitmix64(parent ^ fnv1a(component));
}

}  // namespace wme
