// Fibonacci LFSR used to pick per-symbol cyclic shifts.
#pragma once

#include <cstdint>
#include <utility>

namespace wurook {

/// Register contents plus feedback mask. Bit (width-1) is the oldest stage.
/// The default is x^7 + x^4 + 1 (the 802.11 scrambler) with an all-ones seed.
struct LfsrState {
    std::uint32_t reg = 0x7F;
    std::uint32_t taps = (1u << 6) | (1u << 3);
    unsigned width = 7;

    /// Throws std::invalid_argument on a zero register or a bad width/tap mask.
    void validate() const;
    /// Clocks once and returns the emitted (feedback) bit.
    int clock();
};

/// Clocks three times; the first emitted bit is the MSB of the returned shift.
std::pair<int, LfsrState> lfsr_next3(LfsrState state);

/// Maps an arbitrary 64-bit seed onto a valid non-zero register of the given width.
LfsrState lfsr_from_seed(std::uint64_t seed, LfsrState proto = {});

} // namespace wurook
