#include "wurook/commands.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "wurook/log.hpp"
#include "wurook/seed.hpp"

namespace wurook {

using nlohmann::json;

namespace {

constexpr double kSymbolPaprBoundDb = 3.02;
constexpr std::size_t kVerifyOversample = 16;

std::filesystem::path prepare_dir(const ExperimentConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.output_dir)) {
        throw IoError("cannot create output directory " + cfg.output_dir.string() +
                      (ec ? ": " + ec.message() : ""));
    }
    return cfg.output_dir;
}

void write_file(const std::filesystem::path& path, std::string_view data, std::vector<std::filesystem::path>& files) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.close();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
    files.push_back(path);
}

std::string gint_str(Gint g) {
    if (g == kOne) {
        return "1";
    }
    if (g == kMinusOne) {
        return "-1";
    }
    if (g == kI) {
        return "i";
    }
    if (g == kMinusI) {
        return "-i";
    }
    return format_coeffs(std::span<const Gint>(&g, 1));
}

json set_json(const ChannelSequenceSet& set) {
    json a = json::array();
    for (const auto& s : set.per_channel) {
        a.push_back(s ? json(s->str()) : json(nullptr));
    }
    return a;
}

std::string packed_f32(std::span<const cf64> x) {
    static_assert(std::endian::native == std::endian::little, "IQ writer assumes a little-endian host");
    std::string raw(x.size() * 8, '\0');
    for (std::size_t i = 0; i < x.size(); ++i) {
        const float iq[2] = {static_cast<float>(x[i].real()), static_cast<float>(x[i].imag())};
        std::memcpy(raw.data() + 8 * i, iq, 8);
    }
    return raw;
}

std::string stem(const std::string& cmd, const ExperimentConfig& cfg) { return cmd + "_" + cfg.fingerprint(); }

} // namespace

std::string layout_json(const PacketLayout& layout, const ChannelPlan& plan, std::size_t sample_offset) {
    json j;
    j["sample_offset"] = sample_offset;
    j["samples"] = layout.total_samples();
    j["slot_samples"] = layout.slot_samples;
    j["legacy_samples"] = layout.legacy_samples;
    j["total_slots"] = layout.total_slots;
    j["all_inactive"] = layout.all_inactive;
    json segs = json::array();
    for (const auto& s : layout.segments) {
        segs.push_back({{"name", s.name},
                        {"start", s.start},
                        {"length", s.length},
                        {"start_us", static_cast<double>(s.start) / layout.sample_rate * 1e6},
                        {"duration_us", static_cast<double>(s.length) / layout.sample_rate * 1e6}});
    }
    j["segments"] = segs;
    json chans = json::array();
    for (std::size_t ch = 0; ch < 4; ++ch) {
        const auto& t = layout.channels[ch];
        json c{{"channel", ch + 1}, {"rate", to_string(t.rate)}};
        if (t.rate != Rate::kInactive) {
            c["payload"] = bits_to_string(plan.channels[ch].payload);
            c["sync_slots"] = t.sync_slots;
            c["slots"] = bits_to_string(t.slots);
        }
        chans.push_back(c);
    }
    j["channels"] = chans;
    json shifts = json::array();
    for (const auto& s : layout.shifts) {
        shifts.push_back({s.channel < 0 ? json(nullptr) : json(s.channel + 1), s.slot, s.shift});
    }
    j["shifts"] = shifts; // [channel or null for composite, slot, shift]
    return j.dump();
}

CommandResult cmd_verify(const ExperimentConfig& cfg, std::ostream& console) {
    CommandResult res;
    if (cfg.verify_patterns.empty()) {
        console << "verify: no patterns configured, nothing to do\n";
        return res;
    }
    // Throws InvariantError naming the first failing lag.
    const GolayPair base(cfg.golay.base.a.coeffs(), cfg.golay.base.b.coeffs());

    const AllocationGeometry geom{cfg.waveform.channel_center_bins, cfg.waveform.idft_size * kVerifyOversample};
    json rows = json::array();
    std::vector<std::string> violations;
    for (const auto& text : cfg.verify_patterns) {
        const auto pattern = pattern_from_string(text);
        json row{{"pattern", text}};
        if (is_starred(pattern)) {
            const auto r = qpsk_phase_search(pattern, geom, cfg.golay.base);
            row["kind"] = "starred";
            row["channel"] = starred_channel(pattern) + 1;
            row["theta1"] = gint_str(r.theta1);
            row["theta2"] = gint_str(r.theta2);
            row["papr_db"] = r.papr_db;
            row["sequences"] = set_json(r.set);
            console << std::left << std::setw(6) << text << "starred  ch" << starred_channel(pattern) + 1
                    << " theta=(" << gint_str(r.theta1) << ", " << gint_str(r.theta2) << ")  PAPR "
                    << std::fixed << std::setprecision(3) << r.papr_db << " dB\n";
            rows.push_back(row);
            continue;
        }
        const auto set = table1_select(pattern, cfg.golay.base, cfg.golay.table);
        row["sequences"] = set_json(set);
        if (set.active_count() == 0) {
            row["kind"] = "empty";
            console << std::left << std::setw(6) << text << "empty\n";
            rows.push_back(row);
            continue;
        }
        const auto cert = certify_composite(set, cfg.waveform.channel_center_bins);
        const double p = symbol_papr_db(set, geom);
        const bool ok = cert.has_value() && p <= kSymbolPaprBoundDb;
        row["kind"] = "cs";
        row["certified"] = cert.has_value();
        if (cert) {
            row["partner"] = format_coeffs(cert->b());
        }
        row["papr_db"] = p;
        row["pass"] = ok;
        if (!cert) {
            violations.push_back(text + ": no complementary partner for the composite");
        } else if (p > kSymbolPaprBoundDb) {
            violations.push_back(text + ": symbol PAPR above the 3.02 dB bound");
        }
        console << std::left << std::setw(6) << text << (ok ? "CS ok   " : "FAILED  ") << "PAPR " << std::fixed
                << std::setprecision(3) << p << " dB\n";
        rows.push_back(row);
    }

    json report{{"fingerprint", cfg.fingerprint()},
                {"oversample", kVerifyOversample},
                {"bound_db", kSymbolPaprBoundDb},
                {"patterns", rows},
                {"violations", violations}};
    const auto dir = prepare_dir(cfg);
    write_file(dir / (stem("verify", cfg) + ".json"), report.dump(2) + "\n", res.files);
    if (!violations.empty()) {
        for (const auto& v : violations) {
            logger()->error("{}", v);
        }
        res.exit_code = kExitInvariant;
    }
    console << "verify: " << cfg.verify_patterns.size() << " patterns, " << violations.size() << " violations\n";
    return res;
}

CommandResult cmd_generate(const ExperimentConfig& cfg, std::ostream& console) {
    CommandResult res;
    if (cfg.generate.packets == 0) {
        throw ConfigError("'generate.packets' must be >= 1");
    }
    const auto tx = make_transmitter(cfg);
    const double fs = cfg.waveform.sample_rate();
    std::vector<cf64> all;
    json packets = json::array();
    for (std::size_t k = 0; k < cfg.generate.packets; ++k) {
        auto plan = random_plan(cfg.rates, cfg.payload, cfg.seed, k, cfg.ldr_second);
        for (std::size_t ch = 0; ch < 4; ++ch) {
            if (cfg.payload_bits[ch]) {
                plan.channels[ch].payload = *cfg.payload_bits[ch];
            }
        }
        LfsrState lfsr = cfg.lfsr;
        if (k > 0) {
            lfsr = lfsr_from_seed(derive_seed(cfg.seed, "generate-lfsr", k), cfg.lfsr);
        }
        auto pkt = tx.build(plan, cfg.sync, lfsr, cfg.legacy);
        if (cfg.pa) {
            pkt.signal = rapp_apply(pkt.signal, *cfg.pa);
        }
        packets.push_back(json::parse(layout_json(pkt.layout, plan, all.size())));
        all.insert(all.end(), pkt.signal.samples.begin(), pkt.signal.samples.end());
    }

    const auto dir = prepare_dir(cfg);
    const std::string base = stem("generate", cfg);
    write_file(dir / (base + ".iq"), packed_f32(all), res.files);

    json side;
    side["format"] = "cf32_le";
    side["iq_file"] = base + ".iq";
    side["sample_rate_hz"] = fs;
    side["samples"] = all.size();
    side["duration_us"] = static_cast<double>(all.size()) / fs * 1e6;
    side["method"] = tx.name();
    side["rates"] = cfg.rates;
    side["pa"] = cfg.pa ? json(cfg.pa->obo_db) : json(nullptr); // OBO in dB
    side["fingerprint"] = cfg.fingerprint();
    side["packets"] = packets;
    write_file(dir / (base + ".json"), side.dump(2) + "\n", res.files);

    if (cfg.generate.write_csv || all.size() <= cfg.generate.csv_auto_limit) {
        std::ostringstream os;
        os << "i,q\n" << std::setprecision(9);
        for (const auto& v : all) {
            os << static_cast<float>(v.real()) << ',' << static_cast<float>(v.imag()) << '\n';
        }
        write_file(dir / (base + ".csv"), os.str(), res.files);
    }
    console << "generate: " << tx.name() << " " << cfg.rates << ", " << cfg.generate.packets << " packet(s), "
            << all.size() << " samples (" << std::fixed << std::setprecision(1)
            << static_cast<double>(all.size()) / fs * 1e6 << " us)\n";
    for (const auto& f : res.files) {
        console << "  " << f.string() << '\n';
    }
    return res;
}

CommandResult cmd_papr(const ExperimentConfig& cfg, std::ostream& console) {
    CommandResult res;
    const auto tx = make_transmitter(cfg);
    const auto report = papr_experiment(tx, papr_config(cfg));
    const auto dir = prepare_dir(cfg);
    const std::string base = stem("papr", cfg);
    write_file(dir / (base + ".json"), to_json(report) + "\n", res.files);
    write_file(dir / (base + ".csv"), to_csv(report), res.files);
    console << "papr: " << tx.name() << " " << cfg.rates << ", " << cfg.papr.n_packets << " packets, "
            << report.window_papr_db.size() << " windows of " << cfg.papr.window_us << " us\n"
            << std::fixed << std::setprecision(2) << "  p50 " << report.p50 << " dB  p80 " << report.p80
            << " dB  p99 " << report.p99 << " dB\n";
    return res;
}

CommandResult cmd_psd(const ExperimentConfig& cfg, std::ostream& console) {
    CommandResult res;
    const auto tx = make_transmitter(cfg);
    const auto mask = load_mask(cfg.mask_file);
    const auto report = psd_experiment(tx, psd_config(cfg), mask);
    const auto dir = prepare_dir(cfg);
    const std::string base = stem("psd", cfg);
    write_file(dir / (base + ".json"), to_json(report) + "\n", res.files);
    write_file(dir / (base + ".csv"), to_csv(report), res.files);
    console << "psd: " << tx.name() << " " << cfg.rates << ", PA "
            << (cfg.pa ? "OBO " + std::to_string(cfg.pa->obo_db).substr(0, 4) + " dB" : std::string("off")) << '\n';
    if (report.sem) {
        console << std::fixed << std::setprecision(2) << "  mask " << (report.sem->pass ? "PASS" : "FAIL")
                << ", margin " << report.sem->margin_db << " dB at " << report.sem->worst_freq_hz / 1e6 << " MHz\n";
    }
    return res;
}

CommandResult cmd_ber(const ExperimentConfig& cfg, std::ostream& console) {
    CommandResult res;
    const auto tx = make_transmitter(cfg);
    const auto curves = ber_sweep(tx, ber_config(cfg));
    const auto dir = prepare_dir(cfg);
    const std::string base = stem("ber", cfg);
    write_file(dir / (base + ".json"), to_json(curves) + "\n", res.files);
    write_file(dir / (base + ".csv"), to_csv(curves), res.files);
    console << "ber: " << tx.name() << " " << cfg.rates << ", PA "
            << (cfg.pa ? "on" : "off") << ", " << (cfg.channel == ChannelKind::kAwgn ? "AWGN" : "fading") << '\n';
    console << "  rate  snr_db        ber     errors       bits\n";
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            console << "  " << std::left << std::setw(4) << to_string(c.rate) << std::right << std::fixed
                    << std::setprecision(1) << std::setw(8) << p.snr_db << std::scientific << std::setprecision(3)
                    << std::setw(11) << p.ber << std::setw(11) << p.bit_errors << std::setw(11) << p.bits
                    << '\n';
        }
    }
    return res;
}

} // namespace wurook
