#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace reprocf {

/// Seeded random stream. All draws go through explicit integer-to-real
/// mappings on top of mt19937_64, whose output sequence is fixed by the
/// standard, so identical seeds give identical draws on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection-sampled, bias-free. n must be > 0.
    std::int64_t below(std::int64_t n) {
        const auto bound = static_cast<std::uint64_t>(n);
        const std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return static_cast<std::int64_t>(r % bound);
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Fisher-Yates shuffle of the first k slots; after the call, v[0..k)
    /// is a uniform k-sample without replacement from the whole vector.
    template <typename T>
    void shuffle_prefix(std::vector<T>& v, std::size_t k) {
        const std::size_t n = v.size();
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::size_t>(below(static_cast<std::int64_t>(n - i)));
            std::swap(v[i], v[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (!v.empty()) shuffle_prefix(v, v.size() - 1);
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; decorrelates related seed values.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a over raw bytes. Stable across platforms, unlike std::hash.
inline std::uint64_t hash_bytes(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace reprocf
