#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ecsim::random {

/// One independent stream per (seed, index) pair. Results never depend on the
/// order in which streams are created or consumed.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stateless fair coin for (seed, index): +1 or -1.
inline int sign_draw(std::uint64_t seed, std::uint64_t index) {
    return (splitmix64(splitmix64(seed) ^ index) >> 63) ? 1 : -1;
}

/// Standard normal draws by Box-Muller.
class Gaussian {
public:
    double operator()(std::mt19937_64& g) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = unit(g);
        } while (u1 <= 0.0);
        const double u2 = unit(g);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    static double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ecsim::random
