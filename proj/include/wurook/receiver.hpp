// Non-coherent wake-up receiver: mixer + IIR channel filter, |I|+|Q| slot
// energies, WUR bit decisions.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wurook/types.hpp"
#include "wurook/waveform.hpp"

namespace wurook {

/// y = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0;
    double a1 = 0, a2 = 0;
};

class IirFilter {
  public:
    IirFilter() = default;
    IirFilter(std::vector<Biquad> sections, int order, double cutoff_hz, double rate_hz);

    /// Pass-through filter (no sections).
    static IirFilter identity(double rate_hz);

    [[nodiscard]] const std::vector<Biquad>& sections() const { return sections_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] double cutoff_hz() const { return cutoff_hz_; }
    [[nodiscard]] double rate_hz() const { return rate_hz_; }

    [[nodiscard]] cf64 response(double f_hz) const;
    /// Group delay at DC in samples.
    [[nodiscard]] double group_delay_dc() const;
    /// Sum of |h[n]|^2: output/input power ratio for white noise.
    [[nodiscard]] double noise_gain() const;
    [[nodiscard]] std::vector<cf64> poles() const;
    [[nodiscard]] bool stable() const;

    /// Zero initial state; in and out may alias.
    void apply(std::span<const cf64> in, std::span<cf64> out) const;

  private:
    std::vector<Biquad> sections_;
    int order_ = 0;
    double cutoff_hz_ = 0.0;
    double rate_hz_ = 0.0;
};

/// Digital Butterworth low-pass by bilinear transform with a prewarped cutoff.
/// Each section is normalized to unit DC gain. Throws ConfigError unless
/// order >= 1 and 0 < cutoff < rate/2.
IirFilter butterworth_design(int order, double cutoff_hz, double rate_hz);

/// Mix by -center, filter, keep every `decimation`-th sample.
IqSignal channelize(const IqSignal& signal, double center_hz, const IirFilter& filter, std::size_t decimation = 1);

struct EnvelopeDecision {
    std::size_t channel = 0;
    Rate rate = Rate::kInactive;
    /// Sum of |I|+|Q| per payload slot.
    std::vector<double> slot_energy;
    Bits bits;
    /// Energy of the decided hypothesis minus the other one (>= 0).
    std::vector<double> margins;
};

/// Decodes channel `ch` of the payload. `signal` starts at sample `origin`
/// of the packet timeline and runs at layout.sample_rate / decimation;
/// slot windows are delayed by offset_samples (in output samples).
/// Throws ConfigError if a slot window falls outside the signal.
EnvelopeDecision envelope_decode(const IqSignal& signal, const PacketLayout& layout, std::size_t ch,
                                 long offset_samples = 0, std::size_t decimation = 1, std::size_t origin = 0);

std::string to_json(const EnvelopeDecision& d);

struct ReceiverConfig {
    int filter_order = 5;
    double cutoff_hz = 5e6;
    /// Slot timing offset in synthesis-rate samples; default: DC group delay, rounded.
    std::optional<long> offset_samples;
    std::size_t decimation = 1;
};

class WurReceiver {
  public:
    WurReceiver(ReceiverConfig cfg, double sample_rate);

    [[nodiscard]] const IirFilter& filter() const { return filter_; }
    [[nodiscard]] long offset_samples() const { return offset_; }
    [[nodiscard]] const ReceiverConfig& config() const { return cfg_; }

    /// Channelizes `rx` and decodes channel `ch`. The signal is zero-extended
    /// as needed to cover the delayed final slot.
    [[nodiscard]] EnvelopeDecision decode(const IqSignal& rx, const PacketLayout& layout, std::size_t ch,
                                          double center_hz) const;

  private:
    ReceiverConfig cfg_;
    IirFilter filter_;
    long offset_ = 0;
};

} // namespace wurook
