// rng.hpp - deterministic random streams.
//
// Episode reproducibility requires bit-identical draws regardless of the
// standard library, so distributions are implemented here (std::*_distribution
// algorithms are implementation-defined). Generator: xoshiro256++ seeded
// through splitmix64.
#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace topnav {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// FNV-1a, used to derive independent named streams from one seed.
inline uint64_t hash_label(std::string_view label) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t s = seed ^ (salt + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(uint64_t seed = 0) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        has_spare_ = false;
    }

    // Derive an independent stream, e.g. rng for terrain noise vs. eval noise.
    static Rng stream(uint64_t seed, std::string_view label) {
        return Rng(mix_seed(seed, hash_label(label)));
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    // Standard normal via Box-Muller (deterministic, pair-cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t s_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace topnav
