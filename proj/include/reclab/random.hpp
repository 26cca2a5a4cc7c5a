#pragma once

#include <cstdint>
#include <random>

namespace reclab {

/// Counter-addressed random stream. Stream (seed, index) is fully determined
/// by its two keys, so record i of a dataset or batch b of a Monte Carlo
/// estimate can be drawn independently of every other record or batch.
///
/// Uses mt19937_64 seeded through std::seed_seq; both are specified
/// bit-exactly by the standard. Uniform doubles are built from the top 53
/// bits instead of std::uniform_real_distribution, whose output is
/// implementation-defined.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t index) : engine_(make_engine(seed, index)) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound). Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r = engine_();
        while (r >= limit) {
            r = engine_();
        }
        return r % bound;
    }

    std::uint64_t bits() { return engine_(); }

  private:
    static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32)};
        return std::mt19937_64(seq);
    }

    std::mt19937_64 engine_;
};

/// Derives a child seed from a parent seed and a tag (splitmix64 finalizer).
/// Used to give each sweep cell and replicate its own key space.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
    std::uint64_t z = parent + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace reclab
