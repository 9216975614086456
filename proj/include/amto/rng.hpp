// Deterministic random number generation.
//
// Everything downstream (weight init, splits, batch shuffling, source
// selection) must be bitwise-reproducible from a 64-bit seed, so the
// generator and every distribution are pinned here instead of relying on
// implementation-defined stdlib distributions.
#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace amto {

/// splitmix64 finalizer. Bijective 64-bit mix, used both as the stream
/// generator step and for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a label (task id, role tag,
/// epoch number...). seed_combine(a,b) != seed_combine(b,a) by design.
constexpr std::uint64_t seed_combine(std::uint64_t parent, std::uint64_t label) {
    return mix64(parent ^ mix64(label));
}

/// Role tags for seed derivation, so distinct consumers of the same master
/// seed get unrelated streams.
namespace seed_tag {
inline constexpr std::uint64_t split = 0x53504c4954ull;        // task split
inline constexpr std::uint64_t init = 0x494e4954ull;           // weight init
inline constexpr std::uint64_t master_batch = 0x4d42415443ull; // master batch shuffle
inline constexpr std::uint64_t slave_batch = 0x5342415443ull;  // slave batch shuffle
inline constexpr std::uint64_t select = 0x53454c4543ull;       // source selection
inline constexpr std::uint64_t test_split = 0x5445535453ull;   // gross/test partition
inline constexpr std::uint64_t label_noise = 0x4e4f495345ull;  // label corruption
inline constexpr std::uint64_t augment = 0x4155470000ull;      // batch augmentation
inline constexpr std::uint64_t repeat = 0x5250540000ull;       // per-repeat run seed
}  // namespace seed_tag

/// splitmix64 stream. Small state, full 2^64 period, deterministic across
/// platforms; adequate statistical quality for sampling and shuffling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return mix64(state_++); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Fixed-point multiply (Lemire); the
    /// O(2^-64) bias is irrelevant here and the method is branch-free and
    /// identical everywhere.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Marsaglia polar. Consumes a variable number of
    /// uniforms; caches the spare deviate.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Fisher-Yates shuffle, pinned here so the permutation never depends on
    /// the stdlib's std::shuffle implementation.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace amto
