#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hycard {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic per-subtask seeds so folds / models / grid cells can run in
// any order (or on any thread) and still reproduce bit-identically.
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = splitmix64(base ^ 0x517cc1b727220a95ull);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

// mt19937_64 engine with hand-rolled value transforms. std::uniform_*_distribution
// is not guaranteed to produce the same stream across standard libraries, and we
// promise byte-identical artifacts for a fixed seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n). n must be > 0. Modulo bias is irrelevant at our n.
    size_t index(size_t n) { return static_cast<size_t>(next_u64() % static_cast<uint64_t>(n)); }

    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        // Box-Muller; u clamped away from 0 so log() stays finite.
        double u = uniform();
        if (u < 1e-300) u = 1e-300;
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return mean + stddev * r * std::cos(a);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace hycard
