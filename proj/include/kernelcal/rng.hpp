#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "kernelcal/errors.hpp"

namespace kernelcal {

// Deterministic random stream. Draws go through an explicit 53-bit uniform
// and hand-rolled inverse-CDF sampling so results are identical across
// standard library implementations.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 bits.
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        // Box-Muller on explicit uniforms.
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Inverse-CDF draw from unnormalized nonnegative weights.
    template <typename Container>
    int categorical(const Container& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw NumericError("categorical: all weights zero");
        double u = uniform() * total;
        int last = -1;
        int i = 0;
        for (double w : weights) {
            if (w > 0.0) {
                last = i;
                u -= w;
                if (u < 0.0) return i;
            }
            ++i;
        }
        return last;  // guard against accumulated roundoff
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

// Derive a stream for a (seed, stream index) pair; used to split work across
// partitions without correlated draws.
inline RngStream derived_stream(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 mixing of the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return RngStream(z);
}

}  // namespace kernelcal
