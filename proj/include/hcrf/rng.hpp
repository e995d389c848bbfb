#pragma once

#include <cstdint>

namespace hcrf {

/// xorshift64* generator (shifts 12/25/27, multiplier 0x2545F4914F6CDD1D).
///
/// The state is seeded as seed XOR 0x9E3779B97F4A7C15; a zero state, which
/// the generator cannot leave, is replaced by that constant. Every
/// randomized step in the library draws from this generator so results are
/// reproducible across platforms.
class XorShift64Star {
public:
    explicit XorShift64Star(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 random bits.
    double uniform();

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached and returned by the next call.
    double normal();

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace hcrf
