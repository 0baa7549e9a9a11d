#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace lse {

// Deterministic PRNG used for every random decision in the library.
//
// Algorithm (stable across releases, do not change without a version bump):
//   * state: xoshiro256++ (Blackman & Vigna, 2019)
//   * seeding: the 64-bit seed is expanded into the four state words with
//     splitmix64
//   * uniform(): top 53 bits of next_u64() scaled by 2^-53, giving [0, 1)
//   * normal(): Box-Muller on two uniforms; the second deviate is cached
//   * below(n): Lemire multiply-shift reduction of next_u64()
//
// The same seed always yields the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform double in [0, 1).
    double uniform();

    // Standard normal deviate.
    double normal();

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// Stable 64-bit FNV-1a hash; used for sub-seed derivation and content digests.
std::uint64_t fnv1a64(std::string_view bytes);

// Derives an independent child seed from a master seed and a role label.
// Equal (seed, label) pairs always produce the same child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace lse
