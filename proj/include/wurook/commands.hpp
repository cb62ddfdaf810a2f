// Subcommand implementations behind the `wurook` executable.
#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "wurook/config.hpp"

namespace wurook {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1, // unexpected error
    kExitConfig = 2,
    kExitInvariant = 3,
    kExitIo = 4,
};

struct CommandResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
};

/// Certifies the configured patterns (complementary partner, symbol PAPR
/// bound, starred-row phase search) and writes verify_<fp>.json. A failed
/// check yields kExitInvariant after the report is written; an invalid base
/// pair throws InvariantError.
CommandResult cmd_verify(const ExperimentConfig& cfg, std::ostream& console);

/// Writes generate_<fp>.iq (interleaved float32 LE I/Q), generate_<fp>.json
/// (layout sidecar) and, for short signals or on request, generate_<fp>.csv.
CommandResult cmd_generate(const ExperimentConfig& cfg, std::ostream& console);

CommandResult cmd_papr(const ExperimentConfig& cfg, std::ostream& console);
CommandResult cmd_psd(const ExperimentConfig& cfg, std::ostream& console);
CommandResult cmd_ber(const ExperimentConfig& cfg, std::ostream& console);

/// Layout of one packet as JSON (segments, per-channel slots, shift log).
std::string layout_json(const PacketLayout& layout, const ChannelPlan& plan, std::size_t sample_offset = 0);

} // namespace wurook
