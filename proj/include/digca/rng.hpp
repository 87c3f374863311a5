#pragma once

#include <cstdint>
#include <string_view>

namespace digca {

// splitmix64; used to derive independent stream seeds from one master seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hashCombine(uint64_t seed, uint64_t v) {
    uint64_t s = seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

inline uint64_t hashTag(std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive the seed of a named stream from a base seed.
inline uint64_t deriveSeed(uint64_t base, std::string_view tag, uint64_t index = 0) {
    return hashCombine(hashCombine(base, hashTag(tag)), index);
}

// Small deterministic generator (xoshiro-free: splitmix-fed mt-less).
// Uniform mapping is done by hand so results do not depend on the standard
// library's distribution implementations.
class RngStream {
  public:
    explicit RngStream(uint64_t seed = 0) : state_(seed) {
        // warm up so nearby seeds diverge
        next();
        next();
    }

    uint64_t next() { return splitmix64(state_); }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Uniform index in [0, n). n must be positive.
    size_t index(size_t n) { return static_cast<size_t>(next() % n); }

  private:
    uint64_t state_;
};

}  // namespace digca
