#pragma once

#include <cstdint>

namespace onto {

// SplitMix64 is the single pseudo-random stream used everywhere
// reproducibility matters (parameter init, synthetic data generation).
// The state advances by the 64-bit golden-ratio increment and the output
// is the standard finalizer mix of the advanced state, so the generator
// is trivially re-implementable in any language:
//
//   state += 0x9e3779b97f4a7c15
//   z = state
//   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   return z ^ (z >> 31)
//
// bounded(n) reduces by plain modulo; the bias is irrelevant at the
// ranges used here and keeps the stream easy to reproduce.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 significant bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); n == 0 returns 0.
    uint64_t bounded(uint64_t n) { return n ? next_u64() % n : 0; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

private:
    uint64_t state_;
};

}  // namespace onto
