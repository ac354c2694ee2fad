// SPDX-License-Identifier: MIT
//
// Counter-based random streams. Every stream is addressed by a key derived
// from the master seed and a path of integers (replication, stream id, ...),
// so streams can be created in any order, on any thread, and still produce
// the same numbers.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace pricing {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Hashes a path of integers below a master seed into a stream key.
constexpr std::uint64_t derive_key(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t key = mix64(master + 0x9e3779b97f4a7c15ull);
    for (std::uint64_t p : path) {
        key = mix64(key ^ mix64(p + 0x632be59bd9b4e019ull));
    }
    return key;
}

// Well-known stream ids, so that components never share draws.
enum class Stream : std::uint64_t {
    theta = 1,
    bias_direction = 2,
    offline_contexts = 3,
    offline_prices = 4,
    offline_noise = 5,
    online_contexts = 6,
    online_noise = 7,
    policy = 8,
    delta_mc = 9,
    actions = 10,
};

// Output n is mix64(key + n * golden); the state is just (key, counter).
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
    CounterRng(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept
        : key_(derive_key(master, path)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ull);
    }

    // Uniform on (0, 1].
    double uniform() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller, one variate per call.
    double normal() noexcept;

    // Fair coin.
    bool bernoulli() noexcept { return ((*this)() >> 63) != 0; }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace pricing
