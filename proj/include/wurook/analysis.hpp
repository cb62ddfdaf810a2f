// Measurements and experiment drivers: windowed PAPR statistics, Welch PSD
// with spectral-mask checks, Monte Carlo BER sweeps.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wurook/impairments.hpp"
#include "wurook/receiver.hpp"
#include "wurook/types.hpp"
#include "wurook/waveform.hpp"

namespace wurook {

// ---------------------------------------------------------------- PAPR

/// Nearest-rank percentile of an ascending-sorted list: element ceil(q/100 * n).
double percentile_nearest_rank(std::span<const double> sorted, double q);

struct PaprReport {
    double window_us = 4.0;
    std::size_t window_samples = 0;
    std::vector<double> window_papr_db;
    double p50 = 0.0;
    double p80 = 0.0;
    double p99 = 0.0;
    std::size_t zero_windows = 0;   // skipped
    std::size_t dropped_samples = 0; // trailing partial window(s)

    /// Recomputes the percentiles from window_papr_db.
    void summarize();
    /// Fraction of windows whose PAPR exceeds each threshold.
    [[nodiscard]] std::vector<double> ccdf(std::span<const double> thresholds_db) const;
};

/// PAPR of a single block. Throws InvariantError on all-zero input.
double block_papr_db(std::span<const cf64> x);

/// Contiguous windows over the whole signal. Throws InvariantError if every window is zero.
PaprReport papr(const IqSignal& signal, std::size_t window_samples);

/// Appends windows of x to an existing report (no summarize()).
void accumulate_papr(std::span<const cf64> x, std::size_t window_samples, PaprReport& report);

struct PayloadSpec {
    std::size_t ldr_bits = 4;
    /// Default: 16 without LDR channels, otherwise 4 * ldr_bits + 16 so all
    /// channels finish together.
    std::optional<std::size_t> hdr_bits;

    [[nodiscard]] std::size_t hdr_bits_for(const ChannelPlan& plan) const;
};

/// Plan with random payloads for packet `index`, seeded from `seed`.
ChannelPlan random_plan(std::string_view rates, const PayloadSpec& payload, std::uint64_t seed, std::size_t index,
                        LdrSecondSymbol ldr_second = LdrSecondSymbol::kRepeat);

struct PaprExperimentConfig {
    std::string rates = "HHHH";
    std::size_t n_packets = 500;
    PayloadSpec payload;
    double window_us = 4.0;
    /// Windows start this many slots after the first data slot.
    std::size_t align_offset_slots = 0;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    LdrSecondSymbol ldr_second = LdrSecondSymbol::kRepeat;
};

/// Data-segment windows over n_packets random packets. Throws ConfigError if
/// n_packets < 100, InvariantError if no window carries energy.
PaprReport papr_experiment(const Transmitter& tx, const PaprExperimentConfig& cfg);

// ---------------------------------------------------------------- PSD / SEM

enum class WindowFn { kHann, kRectangular };

struct MaskPoint {
    double offset_hz = 0.0;
    double limit_dbr = 0.0;
};
using SpectralMask = std::vector<MaskPoint>;

/// Rows "offset_mhz,limit_dbr", symmetric about 0, first row at offset 0.
SpectralMask parse_mask(std::string_view csv);
SpectralMask load_mask(const std::filesystem::path& path);
/// Linear-in-dB interpolation; flat beyond the last breakpoint.
double mask_limit(const SpectralMask& mask, double f_hz);

struct SemResult {
    bool pass = true;
    double margin_db = 0.0;
    double worst_freq_hz = 0.0;
};

struct PsdReport {
    std::vector<double> freq_hz;  // ascending, -fs/2 .. fs/2
    std::vector<double> psd;      // linear power per Hz
    std::vector<double> psd_dbr;  // relative to the maximum
    double resolution_hz = 0.0;
    std::size_t segments = 0;
    SpectralMask mask;
    std::optional<SemResult> sem;

    /// Integral of the PSD (equals the mean signal power).
    [[nodiscard]] double total_power() const;
};

/// Averaged modified periodograms. Throws ConfigError if the signal is
/// shorter than one segment or the overlap is not smaller than the segment.
PsdReport psd_welch(const IqSignal& signal, std::size_t segment_len, std::size_t overlap,
                    WindowFn window = WindowFn::kHann);

/// Worst margin = min of (mask - psd_dbr) over bins where the mask is below its
/// in-band level (all bins if there are none, or if an in-band bin violates).
/// Pass iff margin >= 0 (boundary inclusive).
SemResult sem_check(const PsdReport& psd, const SpectralMask& mask);

struct PsdExperimentConfig {
    std::string rates = "LLLL";
    std::size_t n_packets = 20;
    PayloadSpec payload;
    std::optional<RappPa> pa;
    std::size_t segment_len = 4096;
    std::size_t overlap = 2048;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

/// Packets (legacy excluded from the measurement) through the optional PA,
/// concatenated and analyzed with psd_welch; the mask is checked.
PsdReport psd_experiment(const Transmitter& tx, const PsdExperimentConfig& cfg, const SpectralMask& mask);

// ---------------------------------------------------------------- BER

enum class ChannelKind { kAwgn, kFading };

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};
/// 95% Wilson score interval for k successes in n trials.
WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

struct BerPoint {
    double snr_db = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    double ber = 0.0;
    WilsonInterval ci;
};

struct BerCurve {
    std::string method;
    std::string rates;
    Rate rate = Rate::kHdr;
    std::string fingerprint;
    std::vector<BerPoint> points;
};

struct BerConfig {
    std::string rates = "HHHH";
    PayloadSpec payload{8, std::nullopt};
    std::vector<double> snr_db{0, 2, 4, 6, 8, 10, 12};
    ChannelKind channel = ChannelKind::kAwgn;
    FadingProfile fading;
    std::optional<RappPa> pa;
    ReceiverConfig receiver;
    std::uint64_t min_errors = 200;
    std::uint64_t max_bits = 2'000'000;
    std::size_t batch_packets = 8;
    /// Filtering starts this many slots before the first payload slot.
    std::size_t warmup_slots = 2;
    std::size_t calibration_packets = 16;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    LdrSecondSymbol ldr_second = LdrSecondSymbol::kRepeat;

    /// Stable text form used for fingerprints.
    [[nodiscard]] std::string canonical(const std::string& method) const;
};

/// Per-channel reference power: mean receive-filtered ON-slot power of the
/// distortion-free transmit signal (unit mean ON power, no PA, no channel),
/// averaged over calibration packets. With a PA the amplifier output is
/// rescaled to the same mean power, so compression and distortion show up
/// as BER degradation.
std::array<double, 4> calibrate_reference_power(const Transmitter& tx, const BerConfig& cfg);

/// One curve per rate present in the plan (HDR first). Deterministic for a
/// given config regardless of the thread count.
std::vector<BerCurve> ber_sweep(const Transmitter& tx, const BerConfig& cfg);

/// SNR where the curve crosses `target`, interpolated linearly in log10(BER).
std::optional<double> snr_at_ber(const BerCurve& curve, double target);

/// True unless some later point's interval lies entirely above an earlier one's.
bool monotone_within_ci(const BerCurve& curve);

/// True if at every common SNR point `left` is not significantly above `right`.
bool left_of_within_ci(const BerCurve& left, const BerCurve& right);

// ---------------------------------------------------------------- output

std::string to_json(const PaprReport& r, bool include_windows = false);
std::string to_csv(const PaprReport& r);
std::string to_json(const PsdReport& r);
std::string to_csv(const PsdReport& r);
std::string to_json(const std::vector<BerCurve>& curves);
std::string to_csv(const std::vector<BerCurve>& curves);

/// 16 hex digits of FNV-1a over the text.
std::string fingerprint(std::string_view text);

} // namespace wurook
