#include "cpsem/rng.hpp"

namespace cpsem {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t key) {
    // Expand the key to a full seed sequence so nearby keys give unrelated states.
    std::uint64_t s = key;
    std::seed_seq seq{static_cast<std::uint32_t>(s = splitmix64(s)),
                      static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(s = splitmix64(s)),
                      static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(s = splitmix64(s)),
                      static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(s = splitmix64(s)),
                      static_cast<std::uint32_t>(s >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(seed), engine_(seeded_engine(seed)) {}

Rng Rng::split(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t h = splitmix64(key_ ^ 0x6A09E667F3BCC909ULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ (b + 0xBB67AE8584CAA73BULL));
    return Rng(h);
}

double Rng::uniform() {
    // 53 random mantissa bits.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

}  // namespace cpsem
