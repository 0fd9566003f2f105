#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace advfold {

/// Deterministic 64-bit random stream (splitmix64). Used everywhere instead of
/// <random> engines so that identical seeds give identical draws on every
/// platform and standard library.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound). bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// k distinct values drawn from [0, n) by partial Fisher-Yates, returned sorted.
    std::vector<int> distinct_below(int n, int k) {
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        return distinct_from(pool, k);
    }

    /// k distinct elements of `pool`, returned sorted ascending.
    std::vector<int> distinct_from(std::span<const int> pool, int k) {
        std::vector<int> shuffled(pool.begin(), pool.end());
        for (int i = 0; i < k; ++i) {
            const int j =
                i + static_cast<int>(below(static_cast<std::uint64_t>(shuffled.size()) -
                                           static_cast<std::uint64_t>(i)));
            std::swap(shuffled[static_cast<std::size_t>(i)], shuffled[static_cast<std::size_t>(j)]);
        }
        shuffled.resize(static_cast<std::size_t>(k));
        std::sort(shuffled.begin(), shuffled.end());
        return shuffled;
    }

private:
    std::uint64_t state_;
};

/// Seeded 64-bit FNV-1a. All persistent keys and the mock folder derive from
/// this hash; it is bit-stable across platforms by construction.
class Fnv1a64 {
public:
    Fnv1a64() noexcept = default;

    Fnv1a64& absorb(std::uint64_t v) noexcept {
        for (int i = 0; i < 8; ++i) absorb_byte(static_cast<unsigned char>(v >> (8 * i)));
        return *this;
    }

    Fnv1a64& absorb(std::string_view bytes) noexcept {
        for (char c : bytes) absorb_byte(static_cast<unsigned char>(c));
        return *this;
    }

    std::uint64_t value() const noexcept { return hash_; }

private:
    void absorb_byte(unsigned char b) noexcept {
        hash_ ^= b;
        hash_ *= 0x100000001b3ULL;
    }

    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace advfold
