#pragma once

#include <cstdint>

namespace workrest {

/// splitmix64 output finalizer.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based hash of (seed, key, counter). No hidden state, so draws are
/// independent of evaluation order.
constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t key, std::uint64_t counter) {
    return splitmix64_mix(seed ^ (key * 0x9E3779B97F4A7C15ULL) ^ (counter * 0xD1B54A32D192ED03ULL));
}

/// Maps a 64-bit word to [0,1) using its top 53 bits, so the result is never
/// rounded up to 1.0.
constexpr double to_unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform mood in [0,1) for a worker in a slot.
constexpr double mood_sample(std::uint64_t seed, std::uint64_t worker_id, std::uint64_t slot) {
    return to_unit_interval(counter_hash(seed, worker_id, slot));
}

}  // namespace workrest
