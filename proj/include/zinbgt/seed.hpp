#pragma once

#include <cstdint>

namespace zinbgt {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a parent seed and an index, so that
/// per-item results do not depend on processing order or worker count.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Stream salts keep fitting, diagnostics and simulation draws disjoint.
inline constexpr std::uint64_t kFitStream = 0x66697400ULL;
inline constexpr std::uint64_t kDiagStream = 0x64696167ULL;
inline constexpr std::uint64_t kSimStream = 0x73696d00ULL;

}  // namespace zinbgt
