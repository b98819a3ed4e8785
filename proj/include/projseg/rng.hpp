#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace projseg {

// Deterministic random source. mt19937_64 is fully specified by the standard,
// and the uniform/normal draws below avoid the implementation-defined
// std::*_distribution classes, so equal seeds give equal streams everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); n > 0
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }

    int range(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // standard normal via Box-Muller, one spare cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        while (u <= 1e-300) u = uniform();
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64; used to derive independent per-item seeds from a master seed
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t item) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (item + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace projseg
