#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ticknet {

/// Deterministic random source. All distribution sampling is done by hand on
/// top of mt19937_64 so that streams are bit-identical across platforms and
/// standard libraries (std::normal_distribution et al. are not portable).
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Rejection sampling, unbiased.
    uint64_t uniform_below(uint64_t n);

    /// Standard normal via Marsaglia polar method.
    double normal();

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Fold a tag into a seed state (splitmix64 finalizer).
uint64_t seed_mix(uint64_t state, uint64_t value);
uint64_t seed_mix(uint64_t state, std::string_view tag);

/// Derive an independent sub-stream seed from a master seed and a path of
/// tags, e.g. derive_seed(master, "pairs", i, j). Stable across runs.
template <typename... Parts>
uint64_t derive_seed(uint64_t master, Parts... parts) {
    uint64_t state = seed_mix(0x9e3779b97f4a7c15ULL, master);
    ((state = seed_mix(state, parts)), ...);
    return state;
}

}  // namespace ticknet
