#pragma once

#include <cstdint>

namespace nlstm {

// Deterministic random number generator with a fixed, documented algorithm:
// xoshiro256** (Blackman & Vigna), state seeded from the 64-bit seed via
// splitmix64. The same seed yields the same stream on every platform:
//   - next_u64(): the raw xoshiro256** output
//   - uniform(): 53-bit mantissa double in [0, 1), (next_u64() >> 11) * 2^-53
//   - gaussian(): Marsaglia polar method (sqrt/log only, no trig), with the
//     spare value cached, so draws come in a fixed order.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    double gaussian();                     // standard normal

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
    uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nlstm
