#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "deq/types.hpp"

namespace deq {

// Stream layout: every run seed is split into independent substreams with
// splitmix64, so e.g. parameter init and data sampling never share state.
//   stream 0 -> parameter initialization
//   stream 1 -> data sampling
//   stream 2 -> Monte Carlo estimators
//   stream 3 -> constants / region sampling
enum : std::uint64_t {
    kStreamInit = 0,
    kStreamData = 1,
    kStreamMonteCarlo = 2,
    kStreamRegion = 3,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t out = splitmix64(s);
    for (std::uint64_t i = 0; i <= stream; ++i) out = splitmix64(s);
    return out;
}

/// Deterministic portable RNG. Uses the standard mt19937_64 sequence but
/// applies its own bit-to-double maps, because the <random> distributions
/// are not guaranteed identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(derive_stream_seed(seed, stream));
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; one spare value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        spare_ = mag * std::sin(two_pi * u2);
        has_spare_ = true;
        return mag * std::cos(two_pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    Vector uniform_vec(int d, double lo = 0.0, double hi = 1.0) {
        Vector v(d);
        for (int i = 0; i < d; ++i) v(i) = uniform(lo, hi);
        return v;
    }

    Vector normal_vec(int d, double mean = 0.0, double sd = 1.0) {
        Vector v(d);
        for (int i = 0; i < d; ++i) v(i) = normal(mean, sd);
        return v;
    }

    /// Uniform point in the closed d-ball of given radius.
    Vector ball_vec(int d, double radius) {
        Vector dir = normal_vec(d);
        const double n = dir.norm();
        if (n == 0.0) return Vector::Zero(d);
        const double r = radius * std::pow(uniform01(), 1.0 / d);
        return dir * (r / n);
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace deq
