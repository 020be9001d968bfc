#pragma once

#include <cstdint>
#include <random>

namespace cpsem {

/// Seeded pseudo-random stream.
///
/// A stream is identified by its 64-bit key. `split(a, b)` derives a child
/// key by hashing (key, a, b) with SplitMix64, so the child depends only on
/// the parent's identity and never on how many draws the parent has made.
/// The conventional split hierarchy used by the drivers is
/// seed -> (scenario arm, repetition) -> (iteration, purpose).
///
/// Identical key + identical call sequence gives bit-identical draws on the
/// same standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t key() const noexcept { return key_; }

    Rng split(std::uint64_t a, std::uint64_t b = 0) const;

    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::uint64_t next_u64() { return engine_(); }

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cpsem
