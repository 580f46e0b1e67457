#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace gendernet {

// SplitMix64 (Steele/Lea/Flood). All randomness in this project flows through
// this generator so that splits, batches and initial weights reproduce across
// platforms. The generator identity and the shuffle below are part of the
// dataset-split contract documented in the README.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound), bound >= 1. Rejection sampling; the
    // first draw is accepted unless it falls in the 2^64 mod bound remainder.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_;
};

// Fisher-Yates with descending index: i = n-1 .. 1, j = below(i + 1).
template <typename T>
void seeded_shuffle(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

// Derives a stream seed from a run seed and a counter (e.g. epoch index or
// tensor index) by scrambling their combination once more.
inline std::uint64_t mix_seeds(std::uint64_t seed, std::uint64_t counter) {
    SplitMix64 g(seed ^ (counter + 1) * 0x9e3779b97f4a7c15ull);
    return g.next();
}

}  // namespace gendernet
