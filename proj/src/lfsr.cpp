#include "wurook/lfsr.hpp"

#include <bit>
#include <stdexcept>

namespace wurook {

void LfsrState::validate() const {
    if (width == 0 || width > 31) {
        throw std::invalid_argument("LfsrState: width must be in 1..31");
    }
    const std::uint32_t mask = (1u << width) - 1u;
    if ((reg & mask) == 0) {
        throw std::invalid_argument("LfsrState: register must be non-zero");
    }
    if ((taps & mask) == 0 || (taps & ~mask) != 0) {
        throw std::invalid_argument("LfsrState: tap mask must lie within the register width");
    }
}

int LfsrState::clock() {
    const std::uint32_t mask = (1u << width) - 1u;
    const int fb = std::popcount(reg & taps) & 1;
    reg = ((reg << 1) | static_cast<std::uint32_t>(fb)) & mask;
    return fb;
}

std::pair<int, LfsrState> lfsr_next3(LfsrState state) {
    state.validate();
    int shift = 0;
    for (int i = 0; i < 3; ++i) {
        shift = (shift << 1) | state.clock();
    }
    return {shift, state};
}

LfsrState lfsr_from_seed(std::uint64_t seed, LfsrState proto) {
    const std::uint64_t period = (1ull << proto.width) - 1ull;
    proto.reg = static_cast<std::uint32_t>(seed % period) + 1u;
    proto.validate();
    return proto;
}

} // namespace wurook
