// wurook: multi-channel OOK wake-up signal synthesis and analysis.
//
//   wurook <verify|generate|papr|psd|ber> [--config FILE] [--seed N] [--out DIR] [--threads N]
//
// Exit status: 0 ok, 2 configuration/usage error, 3 invariant violation, 4 I/O error.

#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "wurook/commands.hpp"
#include "wurook/log.hpp"
#include "wurook/parallel.hpp"

using namespace wurook;

int main(int argc, char** argv) {
    CLI::App app{"Multi-channel OOK wake-up signal synthesis and analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> threads;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON experiment config (defaults are used when omitted)")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Master seed, overrides the config");
    app.add_option("--out", out_dir, "Output directory, overrides the config and WUROOK_OUT_DIR");
    app.add_option("--threads", threads, "Worker threads (0 = all hardware threads)");
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    using Cmd = CommandResult (*)(const ExperimentConfig&, std::ostream&);
    Cmd cmd = nullptr;
    app.add_subcommand("verify", "Certify the sequence table and the symbol PAPR bound")
        ->callback([&] { cmd = cmd_verify; });
    app.add_subcommand("generate", "Write packet IQ and its layout sidecar")->callback([&] { cmd = cmd_generate; });
    app.add_subcommand("papr", "Windowed PAPR percentiles over random packets")->callback([&] { cmd = cmd_papr; });
    app.add_subcommand("psd", "Welch PSD and spectral mask check")->callback([&] { cmd = cmd_psd; });
    app.add_subcommand("ber", "Monte Carlo BER sweep")->callback([&] { cmd = cmd_ber; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    if (verbose) {
        logger()->set_level(spdlog::level::info);
    }

    try {
        ExperimentConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
        if (const char* env = std::getenv("WUROOK_OUT_DIR"); env && *env) {
            cfg.output_dir = env;
        }
        if (out_dir) {
            cfg.output_dir = *out_dir;
        }
        if (seed) {
            cfg.seed = *seed;
        }
        if (threads) {
            cfg.threads = *threads;
        }
        cfg.threads = resolve_threads(cfg.threads);
        logger()->info("config fingerprint {}", cfg.fingerprint());
        return cmd(cfg, std::cout).exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violated: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
