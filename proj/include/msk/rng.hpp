#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace msk {

// Deterministic random stream. mt19937_64 output is pinned by the standard and
// the value mappings below are explicit, so a seed reproduces bit-identical
// draws on any platform. std::*_distribution is avoided on purpose (its
// sequences are implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {  // in [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double normal() {  // Box-Muller, cached pair
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 1e-300) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    int index(int k) {  // uniform in {0, ..., k-1}
        return static_cast<int>(uniform01() * k) % k;
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable sub-stream seeds so parallel shards draw disjoint deterministic
// sequences (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace msk
