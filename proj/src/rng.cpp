#include "hcrf/rng.hpp"

#include <cmath>
#include <numbers>

namespace hcrf {

namespace {
constexpr std::uint64_t kSeedMix = 0x9E3779B97F4A7C15ULL;
}

XorShift64Star::XorShift64Star(std::uint64_t seed) : state_(seed ^ kSeedMix) {
    if (state_ == 0) state_ = kSeedMix;
}

std::uint64_t XorShift64Star::next_u64() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
}

double XorShift64Star::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double XorShift64Star::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace hcrf
