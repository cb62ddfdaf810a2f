// Front-end and channel impairments: Rapp PA, AWGN, block tapped-delay-line fading.
#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "wurook/types.hpp"

namespace wurook {

/// Memoryless AM/AM amplifier, x -> x / (1 + (|x|/A)^(2p))^(1/(2p)).
struct RappPa {
    double p = 3.0;
    double sat_amplitude = 1.0;
    /// Output back-off in dB, referenced to the mean output power over ON
    /// (non-zero) samples. +inf bypasses the amplifier.
    double obo_db = 5.0;
    /// Average over ON samples only (default) or over every sample.
    bool on_samples_only = true;

    void validate() const;
    /// Output amplitude for an input amplitude.
    [[nodiscard]] double am_am(double a) const;
};

/// Input scale g so that the amplifier output meets the configured back-off.
/// Throws ConfigError on a zero-energy input with finite OBO.
double rapp_drive_gain(std::span<const cf64> x, const RappPa& pa);

IqSignal rapp_apply(const IqSignal& signal, const RappPa& pa);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Adds CN(0, ref_power / 10^(snr/10)) noise. snr_db = +inf returns the input.
IqSignal awgn_apply(const IqSignal& signal, double snr_db, double ref_power, std::uint64_t seed);

/// Unit-variance circular complex Gaussian samples (E|n|^2 = 1).
std::vector<cf64> complex_gaussian(std::size_t n, std::uint64_t seed);

struct FadingTap {
    double delay_s = 0.0;
    double power = 0.0; // linear
};

struct FadingProfile {
    std::vector<FadingTap> taps;
    std::uint64_t rng_seed = 0;

    /// Throws ConfigError unless non-empty, delays sorted and non-negative, powers positive.
    void validate() const;
    /// Rescales powers to sum to 1.
    void normalize();
};

/// Parses "delay_ns,power_db" rows ('#' comments and a header line allowed); result is normalized.
FadingProfile parse_fading_profile(std::string_view csv);
FadingProfile load_fading_profile(const std::filesystem::path& path);

/// One channel realization at a given sample rate. Taps that round to the
/// same sample are merged.
struct FadingRealization {
    std::vector<std::size_t> delay_samples;
    std::vector<cf64> gains;
    /// Largest |rounded - exact| tap delay, in samples.
    double max_rounding = 0.0;

    [[nodiscard]] std::size_t max_delay() const { return delay_samples.empty() ? 0 : delay_samples.back(); }
};

FadingRealization draw_fading(const FadingProfile& profile, double sample_rate);

/// Full linear convolution with the realization (output is longer by max_delay()).
IqSignal apply_realization(const IqSignal& signal, const FadingRealization& h);

/// Draws a realization from profile.rng_seed and applies it.
IqSignal fading_apply(const IqSignal& signal, const FadingProfile& profile);

} // namespace wurook
