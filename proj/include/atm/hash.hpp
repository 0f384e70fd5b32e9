#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace atm {

/// 64-bit FNV-1a. Stable across platforms; used for content and config stamps.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t h = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

/// Per-stage seed derived from the master seed and a stage label.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

std::string hex64(std::uint64_t value);

}  // namespace atm
