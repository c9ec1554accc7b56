#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace planacq {

// Deterministic RNG wrapper. mt19937_64 raw output is specified by the
// standard, but the distribution adapters are not, so the bounded-int and
// real mappings are done by hand to keep streams byte-stable across
// compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, n), n >= 1. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double real() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return real() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 gen_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Seed derivation scheme: every sub-stream of an experiment is keyed by a
// tag string and an index, so reruns under the same master seed replay
// identically regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
    return splitmix64(master ^ fnv1a64(tag) ^ (index * 0x9e3779b97f4a7c15ULL));
}

}  // namespace planacq
