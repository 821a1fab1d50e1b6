#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace lri {

// splitmix64 -- used to derive independent stream seeds from (seed, split, index).
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_stream(uint64_t seed, uint64_t split, uint64_t index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ split) ^ index);
}

// mt19937_64 is fully specified by the standard; the distributions are not.
// Uniform and normal draws are hand-rolled so streams are identical across
// standard libraries and platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0,1) with 53 random bits
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0,n)
    uint64_t uniform_index(uint64_t n) {
        uint64_t x, r;
        do {
            x = eng_();
            r = x % n;
        } while (x - r > uint64_t(-1) - n + 1);
        return r;
    }

    // Box-Muller; second value cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace lri
