// Deterministic seed derivation: one master seed fans out to every
// stochastic component by hashing the component name and an index.
#pragma once

#include <cstdint>
#include <string_view>

namespace wurook {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// seed(master, "fading", 17) etc. Distinct names or indices give unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view component, std::uint64_t index = 0) {
    return splitmix64(splitmix64(master ^ fnv1a(component)) + index);
}

} // namespace wurook
