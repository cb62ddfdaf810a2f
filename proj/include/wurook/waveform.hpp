// Multi-channel OOK transmitter: WUR encoding, subcarrier mapping, OFDM
// symbol synthesis and packet assembly for the complementary-sequence method
// and the per-channel frequency-domain baselines.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wurook/lfsr.hpp"
#include "wurook/sequences.hpp"
#include "wurook/types.hpp"

namespace wurook {

using Bits = std::vector<std::uint8_t>;

struct WaveformParams {
    std::size_t idft_size = 128;
    /// 32 samples = 0.4 us at 80 MHz, giving a 2 us symbol.
    std::size_t cp_len = 32;
    double base_rate = 80e6;
    std::size_t oversample = 4;
    /// Channel centres in base-rate bins (625 kHz spacing with the defaults).
    std::array<int, 4> channel_center_bins{-48, -16, 16, 48};
    double legacy_duration = 20e-6;

    /// Throws ConfigError on any violated constraint.
    void validate() const;

    [[nodiscard]] std::size_t fft_size() const { return idft_size * oversample; }
    [[nodiscard]] std::size_t cp_samples() const { return cp_len * oversample; }
    /// One ON/OFF slot (= one OFDM symbol incl. CP) at the synthesis rate.
    [[nodiscard]] std::size_t slot_samples() const { return (idft_size + cp_len) * oversample; }
    [[nodiscard]] double sample_rate() const { return base_rate * static_cast<double>(oversample); }
    [[nodiscard]] double slot_duration() const { return static_cast<double>(idft_size + cp_len) / base_rate; }
    [[nodiscard]] std::size_t legacy_samples() const;
    /// Channel centre frequency in Hz.
    [[nodiscard]] double channel_center_hz(std::size_t ch) const;
};

enum class LdrSecondSymbol { kRepeat, kIndependent };

struct ChannelConfig {
    Rate rate = Rate::kInactive;
    Bits payload;
    LdrSecondSymbol ldr_second = LdrSecondSymbol::kRepeat;
};

struct ChannelPlan {
    std::array<ChannelConfig, 4> channels;

    /// Rates from a 4-character string such as "LLHH" (X = inactive); empty payloads.
    static ChannelPlan from_rates(std::string_view rates);
    [[nodiscard]] std::string rates_string() const;
    [[nodiscard]] bool all_inactive() const;
    /// Throws ConfigError on a payload for an inactive channel or a non-binary bit.
    void validate() const;
};

/// HDR: 0 -> [1,0], 1 -> [0,1]. LDR (aligned to 2 us slots): 0 -> [1,1,0,0,1,1,0,0], 1 -> complement.
Bits wur_encode(std::span<const std::uint8_t> bits, Rate rate);

/// 32-bit default SYNC word, used when no other sequence is configured.
inline constexpr const char* kDefaultSyncWord = "10101100010001010011100111001110";
Bits bits_from_string(std::string_view s);
std::string bits_to_string(std::span<const std::uint8_t> b);

struct Segment {
    std::string name;
    std::size_t start = 0;
    std::size_t length = 0;
};

struct ChannelTiming {
    Rate rate = Rate::kInactive;
    /// ON/OFF state per slot, SYNC followed by the WUR-encoded payload.
    Bits slots;
    std::size_t sync_slots = 0;
    std::size_t payload_bits = 0;
    /// Mean power of one ON symbol of this channel's payload, before any scaling.
    double on_power = 0.0;

    [[nodiscard]] std::size_t data_slots() const { return slots.size() - sync_slots; }
};

struct ShiftLogEntry {
    int channel = -1; // -1: composite symbol
    std::size_t slot = 0;
    int shift = 0;
};

/// Sample-accurate description of a packet. Slot indices count from the end of the legacy stub.
struct PacketLayout {
    double sample_rate = 0.0;
    std::size_t slot_samples = 0;
    std::size_t legacy_samples = 0;
    std::size_t total_slots = 0;
    std::vector<Segment> segments;
    std::array<ChannelTiming, 4> channels;
    std::vector<ShiftLogEntry> shifts;
    bool all_inactive = false;

    [[nodiscard]] std::size_t slot_start(std::size_t slot) const { return legacy_samples + slot * slot_samples; }
    [[nodiscard]] std::size_t total_samples() const { return slot_start(total_slots); }
    /// First slot in which every active channel is in its payload.
    [[nodiscard]] std::size_t data_begin_slot() const;
    [[nodiscard]] const Segment& segment(std::string_view name) const;
};

struct Packet {
    IqSignal signal;
    PacketLayout layout;
};

/// Source of the 20 us legacy segment, which is carried opaquely.
struct LegacyStub {
    enum class Mode { kPlaceholder, kSilence, kSamples };
    Mode mode = Mode::kPlaceholder;
    std::vector<cf64> samples; // kSamples only; rescaled to the matched power
};

/// Channel sequences placed on the oversampled grid of size N*oversample.
std::vector<cf64> map_to_grid(const ChannelSequenceSet& set, const WaveformParams& params);

/// Unitary IDFT of the grid, cyclic shift of shift*(grid/8) samples, then CP.
IqSignal ofdm_symbol(std::span<const cf64> grid, int cyclic_shift, const WaveformParams& params);

enum class StarredPhases { kSearched, kPublished };

struct GolayOptions {
    BasePair base;
    StarredPhases starred = StarredPhases::kSearched;
    TableVariant table = TableVariant::kCorrected;
};

/// Complementary-sequence transmitter. All pattern/shift symbols are
/// precomputed once; build() is const and thread-safe.
class GolayTransmitter {
  public:
    explicit GolayTransmitter(WaveformParams params, GolayOptions options = {});

    [[nodiscard]] const WaveformParams& params() const { return params_; }
    [[nodiscard]] const ChannelSequenceSet& sequence_set(int pattern_idx) const { return sets_[pattern_idx]; }
    /// Samples of one slot carrying the given pattern and shift.
    [[nodiscard]] std::span<const cf64> symbol(int pattern_idx, int shift) const;

    [[nodiscard]] Packet build(const ChannelPlan& plan, std::span<const std::uint8_t> sync, LfsrState lfsr,
                               const LegacyStub& legacy = {}) const;

  private:
    WaveformParams params_;
    std::array<ChannelSequenceSet, 16> sets_;
    std::vector<cf64> bank_; // [pattern][shift][slot sample]
};

/// Per-channel frequency-domain baseline: independent per-channel synthesis,
/// per-channel random cyclic shifts, fixed per-channel phase rotations.
struct BaselineSequences {
    /// 1..3: example-style placeholders; 0: all-ones (high PAPR).
    int example_id = 0;
    /// HDR ON symbol: mapped at base-bin spacing on the short IDFT.
    ComplexSeq hdr = ComplexSeq::parse("+++0+++");
    /// LDR ON symbol: mapped at half-bin spacing on the double-length IDFT.
    ComplexSeq ldr = ComplexSeq::parse("++++++0++++++");
    std::array<cf64, 4> gamma{cf64{1, 0}, cf64{-1, 0}, cf64{-1, 0}, cf64{-1, 0}};
};

/// Placeholder sequences for examples 1..3, or the all-ones set for 0.
BaselineSequences default_baseline(int example_id);

class BaselineTransmitter {
  public:
    BaselineTransmitter(WaveformParams params, BaselineSequences seqs);

    [[nodiscard]] const WaveformParams& params() const { return params_; }
    [[nodiscard]] const BaselineSequences& sequences() const { return seqs_; }
    [[nodiscard]] std::span<const cf64> hdr_symbol(std::size_t ch, int shift) const;
    [[nodiscard]] std::span<const cf64> ldr_symbol(std::size_t ch, int shift) const;

    /// Each channel draws its shifts from its own LFSR derived from `lfsr`.
    [[nodiscard]] Packet build(const ChannelPlan& plan, std::span<const std::uint8_t> sync, LfsrState lfsr,
                               const LegacyStub& legacy = {}) const;

  private:
    WaveformParams params_;
    BaselineSequences seqs_;
    std::vector<cf64> hdr_bank_; // [ch][shift][slot sample]
    std::vector<cf64> ldr_bank_; // [ch][shift][2 * slot sample]
    double hdr_power_ = 0.0;
    double ldr_power_ = 0.0;
};

/// Either transmitter behind one interface.
class Transmitter {
  public:
    Transmitter(GolayTransmitter t) : impl_(std::move(t)) {}
    Transmitter(BaselineTransmitter t) : impl_(std::move(t)) {}

    [[nodiscard]] Packet build(const ChannelPlan& plan, std::span<const std::uint8_t> sync, LfsrState lfsr,
                               const LegacyStub& legacy = {}) const;
    [[nodiscard]] const WaveformParams& params() const;
    [[nodiscard]] bool is_golay() const { return std::holds_alternative<GolayTransmitter>(impl_); }
    /// "golay" or "baseline-<example>".
    [[nodiscard]] std::string name() const;

  private:
    std::variant<GolayTransmitter, BaselineTransmitter> impl_;
};

/// Free-function forms.
Packet build_packet(const ChannelPlan& plan, std::span<const std::uint8_t> sync, LfsrState lfsr,
                    const WaveformParams& params, const LegacyStub& legacy = {});
Packet baseline_packet(const ChannelPlan& plan, const BaselineSequences& seqs, std::span<const std::uint8_t> sync,
                       LfsrState lfsr, const WaveformParams& params, const LegacyStub& legacy = {});

} // namespace wurook
