// Experiment configuration document (JSON) and its validation.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wurook/analysis.hpp"
#include "wurook/impairments.hpp"
#include "wurook/receiver.hpp"
#include "wurook/waveform.hpp"

namespace wurook {

enum class MethodKind { kGolay, kBaseline };

struct GenerateOptions {
    std::size_t packets = 1;
    bool write_csv = false;
    /// CSV is also written automatically for packets up to this many samples.
    std::size_t csv_auto_limit = 100000;
};

struct ExperimentConfig {
    MethodKind method = MethodKind::kGolay;
    GolayOptions golay;
    BaselineSequences baseline = default_baseline(2);
    WaveformParams waveform;

    std::string rates = "LLHH";
    PayloadSpec payload;
    /// Explicit per-channel payloads for `generate`; empty = random.
    std::array<std::optional<Bits>, 4> payload_bits;
    LdrSecondSymbol ldr_second = LdrSecondSymbol::kRepeat;
    Bits sync = bits_from_string(kDefaultSyncWord);
    LfsrState lfsr;
    LegacyStub legacy;

    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::filesystem::path output_dir = "out";

    std::optional<RappPa> pa;
    ChannelKind channel = ChannelKind::kAwgn;
    std::filesystem::path fading_profile;
    ReceiverConfig receiver;

    /// Patterns for `verify` ("b1b2b3b4" strings); default all 16.
    std::vector<std::string> verify_patterns;
    GenerateOptions generate;
    PaprExperimentConfig papr;
    PsdExperimentConfig psd;
    std::filesystem::path mask_file;
    BerConfig ber;

    /// Stable JSON rendering of every field; the fingerprint hashes this.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::string fingerprint() const;
};

/// Directory holding the shipped data files (fading profile, mask).
std::filesystem::path default_data_dir();

/// Defaults only (no document).
ExperimentConfig default_config();

/// Parses a JSON document. Unknown keys, wrong types and out-of-range values
/// throw ConfigError. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the configured transmitter.
Transmitter make_transmitter(const ExperimentConfig& cfg);

/// Copies the shared settings (plan, seed, threads, PA, channel, receiver)
/// into the per-experiment structures.
PaprExperimentConfig papr_config(const ExperimentConfig& cfg);
PsdExperimentConfig psd_config(const ExperimentConfig& cfg);
BerConfig ber_config(const ExperimentConfig& cfg);

} // namespace wurook
