#include "wurook/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "wurook/fft.hpp"
#include "wurook/log.hpp"
#include "wurook/parallel.hpp"
#include "wurook/seed.hpp"

namespace wurook {

using nlohmann::json;

namespace {

const Bits& default_sync() {
    static const Bits s = bits_from_string(kDefaultSyncWord);
    return s;
}

LegacyStub silent_legacy() {
    LegacyStub l;
    l.mode = LegacyStub::Mode::kSilence;
    return l;
}

std::size_t window_len(double window_us, double fs) {
    const double n = window_us * 1e-6 * fs;
    if (!(n >= 1.0)) {
        throw ConfigError("PAPR window shorter than one sample");
    }
    return static_cast<std::size_t>(std::llround(n));
}

} // namespace

// ---------------------------------------------------------------- PAPR

double percentile_nearest_rank(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw InvariantError("percentile of an empty list");
    }
    if (!(q > 0.0 && q <= 100.0)) {
        throw std::invalid_argument("percentile must be in (0, 100]");
    }
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

void PaprReport::summarize() {
    if (window_papr_db.empty()) {
        throw InvariantError("PAPR: no window carries energy");
    }
    std::vector<double> s = window_papr_db;
    std::sort(s.begin(), s.end());
    p50 = percentile_nearest_rank(s, 50);
    p80 = percentile_nearest_rank(s, 80);
    p99 = percentile_nearest_rank(s, 99);
}

std::vector<double> PaprReport::ccdf(std::span<const double> thresholds_db) const {
    std::vector<double> out;
    for (double t : thresholds_db) {
        const auto n = std::count_if(window_papr_db.begin(), window_papr_db.end(), [t](double v) { return v > t; });
        out.push_back(window_papr_db.empty() ? 0.0
                                             : static_cast<double>(n) / static_cast<double>(window_papr_db.size()));
    }
    return out;
}

double block_papr_db(std::span<const cf64> x) { return papr_db(x); }

void accumulate_papr(std::span<const cf64> x, std::size_t window_samples, PaprReport& report) {
    if (window_samples == 0) {
        throw ConfigError("PAPR window must be at least one sample");
    }
    std::size_t i = 0;
    for (; i + window_samples <= x.size(); i += window_samples) {
        const auto w = x.subspan(i, window_samples);
        double peak = 0.0, sum = 0.0;
        for (const auto& v : w) {
            const double p = std::norm(v);
            peak = std::max(peak, p);
            sum += p;
        }
        if (sum == 0.0) {
            ++report.zero_windows;
            continue;
        }
        report.window_papr_db.push_back(10.0 * std::log10(peak / (sum / static_cast<double>(window_samples))));
    }
    report.dropped_samples += x.size() - i;
}

PaprReport papr(const IqSignal& signal, std::size_t window_samples) {
    PaprReport r;
    r.window_samples = window_samples;
    r.window_us = static_cast<double>(window_samples) / signal.sample_rate * 1e6;
    accumulate_papr(signal.samples, window_samples, r);
    if (r.dropped_samples > 0) {
        logger()->debug("papr: dropped {} trailing samples", r.dropped_samples);
    }
    if (r.zero_windows > 0) {
        logger()->debug("papr: skipped {} all-zero windows", r.zero_windows);
    }
    r.summarize();
    return r;
}

std::size_t PayloadSpec::hdr_bits_for(const ChannelPlan& plan) const {
    if (hdr_bits) {
        return *hdr_bits;
    }
    const bool has_ldr =
        std::any_of(plan.channels.begin(), plan.channels.end(), [](const auto& c) { return c.rate == Rate::kLdr; });
    return has_ldr ? 4 * ldr_bits + 16 : 16;
}

ChannelPlan random_plan(std::string_view rates, const PayloadSpec& payload, std::uint64_t seed, std::size_t index,
                        LdrSecondSymbol ldr_second) {
    auto plan = ChannelPlan::from_rates(rates);
    const std::size_t nh = payload.hdr_bits_for(plan);
    std::mt19937_64 rng(derive_seed(seed, "payload", index));
    for (auto& c : plan.channels) {
        c.ldr_second = ldr_second;
        const std::size_t n = c.rate == Rate::kHdr ? nh : c.rate == Rate::kLdr ? payload.ldr_bits : 0;
        c.payload.resize(n);
        for (auto& b : c.payload) {
            b = static_cast<std::uint8_t>(rng() >> 63);
        }
    }
    return plan;
}

PaprReport papr_experiment(const Transmitter& tx, const PaprExperimentConfig& cfg) {
    if (cfg.n_packets < 100) {
        throw ConfigError("papr experiment needs at least 100 packets");
    }
    const auto& params = tx.params();
    const std::size_t wlen = window_len(cfg.window_us, params.sample_rate());
    std::vector<PaprReport> parts(cfg.n_packets);
    parallel_for(cfg.n_packets, cfg.threads, [&](std::size_t k) {
        const auto plan = random_plan(cfg.rates, cfg.payload, cfg.seed, k, cfg.ldr_second);
        const auto pkt = tx.build(plan, default_sync(), lfsr_from_seed(derive_seed(cfg.seed, "lfsr", k)),
                                  silent_legacy());
        const std::size_t begin = pkt.layout.slot_start(pkt.layout.data_begin_slot() + cfg.align_offset_slots);
        if (begin < pkt.signal.size()) {
            accumulate_papr(std::span<const cf64>(pkt.signal.samples).subspan(begin), wlen, parts[k]);
        }
    });
    PaprReport r;
    r.window_samples = wlen;
    r.window_us = cfg.window_us;
    for (auto& p : parts) {
        r.window_papr_db.insert(r.window_papr_db.end(), p.window_papr_db.begin(), p.window_papr_db.end());
        r.zero_windows += p.zero_windows;
        r.dropped_samples += p.dropped_samples;
    }
    r.summarize();
    return r;
}

// ---------------------------------------------------------------- PSD / SEM

SpectralMask parse_mask(std::string_view csv) {
    SpectralMask m;
    std::istringstream in{std::string(csv)};
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("mask: expected offset_mhz,limit_dbr");
        }
        try {
            m.push_back({std::stod(line.substr(0, comma)) * 1e6, std::stod(line.substr(comma + 1))});
        } catch (const std::invalid_argument&) {
            if (!m.empty()) {
                throw ConfigError("mask: non-numeric row");
            }
        }
    }
    if (m.empty() || m.front().offset_hz != 0.0) {
        throw ConfigError("mask must start at offset 0");
    }
    for (std::size_t i = 1; i < m.size(); ++i) {
        if (!(m[i].offset_hz >= m[i - 1].offset_hz)) {
            throw ConfigError("mask offsets must be non-decreasing");
        }
    }
    return m;
}

SpectralMask load_mask(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) {
        throw IoError("cannot open mask file " + path.string());
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_mask(ss.str());
}

double mask_limit(const SpectralMask& mask, double f_hz) {
    const double a = std::abs(f_hz);
    if (a >= mask.back().offset_hz) {
        return mask.back().limit_dbr;
    }
    for (std::size_t i = 1; i < mask.size(); ++i) {
        if (a <= mask[i].offset_hz) {
            const auto& l = mask[i - 1];
            const auto& r = mask[i];
            if (r.offset_hz == l.offset_hz) {
                return std::min(l.limit_dbr, r.limit_dbr);
            }
            const double t = (a - l.offset_hz) / (r.offset_hz - l.offset_hz);
            return l.limit_dbr + t * (r.limit_dbr - l.limit_dbr);
        }
    }
    return mask.back().limit_dbr;
}

double PsdReport::total_power() const {
    double s = 0.0;
    for (double v : psd) {
        s += v;
    }
    return s * resolution_hz;
}

PsdReport psd_welch(const IqSignal& signal, std::size_t segment_len, std::size_t overlap, WindowFn window) {
    if (segment_len == 0 || signal.size() < segment_len) {
        throw ConfigError("psd_welch: signal shorter than one segment");
    }
    if (overlap >= segment_len) {
        throw ConfigError("psd_welch: overlap must be smaller than the segment length");
    }
    std::vector<double> w(segment_len, 1.0);
    if (window == WindowFn::kHann) {
        for (std::size_t i = 0; i < segment_len; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                        static_cast<double>(segment_len));
        }
    }
    double wss = 0.0;
    for (double v : w) {
        wss += v * v;
    }
    const double fs = signal.sample_rate;
    Fft fft(segment_len);
    std::vector<cf64> buf(segment_len), spec(segment_len);
    std::vector<double> acc(segment_len, 0.0);
    const std::size_t hop = segment_len - overlap;
    std::size_t nseg = 0;
    for (std::size_t s = 0; s + segment_len <= signal.size(); s += hop) {
        for (std::size_t i = 0; i < segment_len; ++i) {
            buf[i] = signal.samples[s + i] * w[i];
        }
        fft.forward(buf, spec);
        for (std::size_t k = 0; k < segment_len; ++k) {
            acc[k] += std::norm(spec[k]);
        }
        ++nseg;
    }
    PsdReport r;
    r.segments = nseg;
    r.resolution_hz = fs / static_cast<double>(segment_len);
    const double scale = 1.0 / (fs * wss * static_cast<double>(nseg));
    const std::size_t half = segment_len / 2;
    double peak = 0.0;
    for (std::size_t j = 0; j < segment_len; ++j) {
        const std::size_t k = (j + segment_len - half) % segment_len; // fftshift
        const double f = (static_cast<double>(j) - static_cast<double>(half)) * r.resolution_hz;
        r.freq_hz.push_back(f);
        r.psd.push_back(acc[k] * scale);
        peak = std::max(peak, r.psd.back());
    }
    for (double v : r.psd) {
        r.psd_dbr.push_back(peak > 0.0 && v > 0.0 ? 10.0 * std::log10(v / peak) : -400.0);
    }
    return r;
}

SemResult sem_check(const PsdReport& psd, const SpectralMask& mask) {
    if (mask.empty()) {
        throw ConfigError("sem_check: empty mask");
    }
    // The PSD is normalized to its own peak, so inside the 0 dBr region the
    // margin is pinned at <= 0 by construction. The reported margin covers the
    // sloped and out-of-band parts; in-band bins only have to comply.
    SemResult res;
    res.margin_db = std::numeric_limits<double>::infinity();
    SemResult inband = res;
    for (std::size_t i = 0; i < psd.freq_hz.size(); ++i) {
        const double limit = mask_limit(mask, psd.freq_hz[i]);
        const double m = limit - psd.psd_dbr[i];
        SemResult& r = limit < mask.front().limit_dbr ? res : inband;
        if (m < r.margin_db) {
            r.margin_db = m;
            r.worst_freq_hz = psd.freq_hz[i];
        }
    }
    if (std::isinf(res.margin_db) || inband.margin_db < 0.0) {
        res = inband.margin_db < res.margin_db ? inband : res;
    }
    res.pass = res.margin_db >= 0.0;
    return res;
}

PsdReport psd_experiment(const Transmitter& tx, const PsdExperimentConfig& cfg, const SpectralMask& mask) {
    if (cfg.n_packets == 0) {
        throw ConfigError("psd experiment needs at least one packet");
    }
    std::vector<std::vector<cf64>> parts(cfg.n_packets);
    parallel_for(cfg.n_packets, cfg.threads, [&](std::size_t k) {
        const auto plan = random_plan(cfg.rates, cfg.payload, cfg.seed, k);
        const auto pkt = tx.build(plan, default_sync(), lfsr_from_seed(derive_seed(cfg.seed, "lfsr", k)),
                                  silent_legacy());
        IqSignal wur(std::vector<cf64>(pkt.signal.samples.begin() + static_cast<long>(pkt.layout.legacy_samples),
                                       pkt.signal.samples.end()),
                     pkt.signal.sample_rate);
        if (cfg.pa) {
            wur = rapp_apply(wur, *cfg.pa);
        }
        parts[k] = std::move(wur.samples);
    });
    IqSignal all;
    all.sample_rate = tx.params().sample_rate();
    for (auto& p : parts) {
        all.samples.insert(all.samples.end(), p.begin(), p.end());
    }
    auto r = psd_welch(all, cfg.segment_len, cfg.overlap);
    r.mask = mask;
    r.sem = sem_check(r, mask);
    return r;
}

// ---------------------------------------------------------------- BER

WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
    if (n == 0) {
        return {0.0, 1.0};
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

std::string BerConfig::canonical(const std::string& method) const {
    json j;
    j["method"] = method;
    j["rates"] = rates;
    j["ldr_bits"] = payload.ldr_bits;
    j["hdr_bits"] = payload.hdr_bits ? json(*payload.hdr_bits) : json(nullptr);
    j["snr_db"] = snr_db;
    j["channel"] = channel == ChannelKind::kAwgn ? "awgn" : "fading";
    if (channel == ChannelKind::kFading) {
        json taps = json::array();
        for (const auto& t : fading.taps) {
            taps.push_back({t.delay_s, t.power});
        }
        j["fading"] = taps;
    }
    if (pa) {
        j["pa"] = {{"p", pa->p}, {"sat", pa->sat_amplitude}, {"obo_db", pa->obo_db}, {"on_only", pa->on_samples_only}};
    } else {
        j["pa"] = nullptr;
    }
    j["rx"] = {{"order", receiver.filter_order},
               {"cutoff_hz", receiver.cutoff_hz},
               {"offset", receiver.offset_samples ? json(*receiver.offset_samples) : json(nullptr)},
               {"decimation", receiver.decimation}};
    j["min_errors"] = min_errors;
    j["max_bits"] = max_bits;
    j["batch_packets"] = batch_packets;
    j["warmup_slots"] = warmup_slots;
    j["calibration_packets"] = calibration_packets;
    j["ldr_second"] = ldr_second == LdrSecondSymbol::kRepeat ? "repeat" : "independent";
    j["seed"] = seed;
    return j.dump();
}

namespace {

struct RxWindow {
    std::size_t origin = 0;
    std::size_t length = 0;
};

RxWindow rx_window(const PacketLayout& layout, const BerConfig& cfg, long offset, std::size_t extra_delay) {
    std::size_t first = layout.total_slots;
    for (const auto& c : layout.channels) {
        if (c.rate != Rate::kInactive) {
            first = std::min(first, c.sync_slots);
        }
    }
    const std::size_t d = cfg.receiver.decimation;
    std::size_t origin = layout.slot_start(first);
    origin -= std::min(origin, cfg.warmup_slots * layout.slot_samples);
    origin -= origin % d;
    std::size_t end = layout.total_samples() + static_cast<std::size_t>(std::max(0L, offset)) + extra_delay + 2 * d;
    end += (d - (end - origin) % d) % d;
    return {origin, end - origin};
}

/// Unit mean ON power, then the optional PA rescaled to the same mean output
/// power, then the receive window [origin, origin + len).
std::vector<cf64> transmit_window(const Packet& pkt, const std::optional<RappPa>& pa, const RxWindow& win) {
    IqSignal s = pkt.signal;
    double on = 0.0;
    std::size_t n_on = 0;
    for (const auto& v : s.samples) {
        const double p = std::norm(v);
        if (p > 0.0) {
            on += p;
            ++n_on;
        }
    }
    double g = n_on ? std::sqrt(static_cast<double>(n_on) / on) : 1.0;
    if (pa && n_on) {
        s = rapp_apply(s, *pa);
        g = std::isinf(pa->obo_db) ? g : std::pow(10.0, pa->obo_db / 20.0) / pa->sat_amplitude;
    }
    std::vector<cf64> out(win.length);
    const std::size_t stop = std::min(s.size(), win.origin + win.length);
    for (std::size_t i = win.origin; i < stop; ++i) {
        out[i - win.origin] = g * s.samples[i];
    }
    return out;
}

double on_slot_power(const IqSignal& y, const PacketLayout& layout, std::size_t ch, long offset, std::size_t d,
                     std::size_t origin, double& samples) {
    const auto& ct = layout.channels[ch];
    const long slot_len = static_cast<long>(layout.slot_samples / d);
    double e = 0.0;
    for (std::size_t t = ct.sync_slots; t < ct.slots.size(); ++t) {
        if (!ct.slots[t]) {
            continue;
        }
        const long start = static_cast<long>((layout.slot_start(t) - origin) / d) + offset;
        for (long i = 0; i < slot_len; ++i) {
            e += std::norm(y.samples[static_cast<std::size_t>(start + i)]);
        }
        samples += static_cast<double>(slot_len);
    }
    return e;
}

} // namespace

std::array<double, 4> calibrate_reference_power(const Transmitter& tx, const BerConfig& cfg) {
    const WaveformParams& params = tx.params();
    const WurReceiver rx(cfg.receiver, params.sample_rate());
    const std::size_t d = cfg.receiver.decimation;
    const long off = rx.offset_samples() / static_cast<long>(d);
    std::array<double, 4> energy{}, count{};
    for (std::size_t k = 0; k < std::max<std::size_t>(1, cfg.calibration_packets); ++k) {
        const auto plan = random_plan(cfg.rates, cfg.payload, derive_seed(cfg.seed, "calibration"), k, cfg.ldr_second);
        const auto pkt = tx.build(plan, default_sync(), lfsr_from_seed(derive_seed(cfg.seed, "calibration-lfsr", k)),
                                  silent_legacy());
        const auto win = rx_window(pkt.layout, cfg, rx.offset_samples(), 0);
        const IqSignal s(transmit_window(pkt, std::nullopt, win), params.sample_rate());
        for (std::size_t ch = 0; ch < 4; ++ch) {
            if (pkt.layout.channels[ch].rate == Rate::kInactive) {
                continue;
            }
            const auto y = channelize(s, params.channel_center_hz(ch), rx.filter(), d);
            energy[ch] += on_slot_power(y, pkt.layout, ch, off, d, win.origin, count[ch]);
        }
    }
    std::array<double, 4> ref{};
    for (std::size_t ch = 0; ch < 4; ++ch) {
        ref[ch] = count[ch] > 0 ? energy[ch] / count[ch] : 0.0;
    }
    return ref;
}

std::vector<BerCurve> ber_sweep(const Transmitter& tx, const BerConfig& cfg) {
    if (cfg.snr_db.empty()) {
        throw ConfigError("ber sweep needs at least one SNR point");
    }
    if (cfg.batch_packets == 0 || cfg.max_bits == 0) {
        throw ConfigError("ber sweep: batch_packets and max_bits must be positive");
    }
    if (cfg.channel == ChannelKind::kFading) {
        cfg.fading.validate();
    }
    const auto base_plan = ChannelPlan::from_rates(cfg.rates);
    if (base_plan.all_inactive()) {
        throw ConfigError("ber sweep: plan has no active channel");
    }
    const WaveformParams& params = tx.params();
    const WurReceiver rx(cfg.receiver, params.sample_rate());
    const std::size_t d = cfg.receiver.decimation;
    const long off = rx.offset_samples() / static_cast<long>(d);
    const auto ref = calibrate_reference_power(tx, cfg);
    // SNR is defined inside the receive filter: scale the full-band noise so
    // its filtered power is ref / snr.
    const double noise_gain = rx.filter().noise_gain();

    // Curve per rate present: HDR then LDR.
    std::vector<Rate> rates;
    for (Rate r : {Rate::kHdr, Rate::kLdr}) {
        for (const auto& c : base_plan.channels) {
            if (c.rate == r) {
                rates.push_back(r);
                break;
            }
        }
    }
    const std::size_t n_snr = cfg.snr_db.size();
    const std::string fp = fingerprint(cfg.canonical(tx.name()));
    std::vector<BerCurve> curves;
    for (Rate r : rates) {
        BerCurve c;
        c.method = tx.name();
        c.rates = cfg.rates;
        c.rate = r;
        c.fingerprint = fp;
        for (double s : cfg.snr_db) {
            c.points.push_back({s, 0, 0, 0.0, {}});
        }
        curves.push_back(std::move(c));
    }
    auto curve_of = [&](Rate r) { return static_cast<std::size_t>(std::find(rates.begin(), rates.end(), r) - rates.begin()); };

    std::vector<std::uint8_t> done(rates.size() * n_snr, 0);
    struct Counts {
        std::vector<std::uint64_t> errors, bits;
    };
    std::size_t next_packet = 0;
    while (std::find(done.begin(), done.end(), 0) != done.end()) {
        std::vector<Counts> batch(cfg.batch_packets);
        parallel_for(cfg.batch_packets, cfg.threads, [&](std::size_t b) {
            const std::size_t k = next_packet + b;
            auto& out = batch[b];
            out.errors.assign(done.size(), 0);
            out.bits.assign(done.size(), 0);
            const auto plan = random_plan(cfg.rates, cfg.payload, cfg.seed, k, cfg.ldr_second);
            const auto pkt = tx.build(plan, default_sync(), lfsr_from_seed(derive_seed(cfg.seed, "lfsr", k)),
                                      silent_legacy());
            FadingRealization h;
            if (cfg.channel == ChannelKind::kFading) {
                FadingProfile prof = cfg.fading;
                prof.rng_seed = derive_seed(cfg.seed, "fading", k);
                h = draw_fading(prof, params.sample_rate());
            }
            const auto win = rx_window(pkt.layout, cfg, rx.offset_samples(), h.max_delay());
            IqSignal s(transmit_window(pkt, cfg.pa, win), params.sample_rate());
            if (cfg.channel == ChannelKind::kFading) {
                s = apply_realization(s, h);
                s.samples.resize(win.length);
            }
            const IqSignal noise(complex_gaussian(win.length, derive_seed(cfg.seed, "noise", k)), params.sample_rate());
            for (std::size_t ch = 0; ch < 4; ++ch) {
                const auto& c = plan.channels[ch];
                if (c.rate == Rate::kInactive) {
                    continue;
                }
                const std::size_t ci = curve_of(c.rate);
                const auto first = done.begin() + static_cast<std::ptrdiff_t>(ci * n_snr);
                if (std::find(first, first + static_cast<std::ptrdiff_t>(n_snr), 0) == first + static_cast<std::ptrdiff_t>(n_snr)) {
                    continue;
                }
                const double fc = params.channel_center_hz(ch);
                const auto ys = channelize(s, fc, rx.filter(), d);
                std::optional<IqSignal> yn;
                IqSignal y = ys;
                for (std::size_t si = 0; si < n_snr; ++si) {
                    const std::size_t slot = ci * n_snr + si;
                    if (done[slot]) {
                        continue;
                    }
                    const double snr = cfg.snr_db[si];
                    if (snr == kNoNoise) {
                        y.samples = ys.samples;
                    } else {
                        if (!yn) {
                            yn = channelize(noise, fc, rx.filter(), d);
                        }
                        const double sigma = std::sqrt(ref[ch] / std::pow(10.0, snr / 10.0) / noise_gain);
                        for (std::size_t i = 0; i < y.size(); ++i) {
                            y.samples[i] = ys.samples[i] + sigma * yn->samples[i];
                        }
                    }
                    const auto dec = envelope_decode(y, pkt.layout, ch, off, d, win.origin);
                    for (std::size_t i = 0; i < c.payload.size(); ++i) {
                        out.errors[slot] += dec.bits[i] != c.payload[i];
                    }
                    out.bits[slot] += c.payload.size();
                }
            }
        });
        next_packet += cfg.batch_packets;
        for (const auto& b : batch) {
            for (std::size_t slot = 0; slot < done.size(); ++slot) {
                auto& pt = curves[slot / n_snr].points[slot % n_snr];
                pt.bit_errors += b.errors[slot];
                pt.bits += b.bits[slot];
            }
        }
        for (std::size_t slot = 0; slot < done.size(); ++slot) {
            const auto& pt = curves[slot / n_snr].points[slot % n_snr];
            done[slot] = pt.bit_errors >= cfg.min_errors || pt.bits >= cfg.max_bits;
        }
    }
    for (auto& c : curves) {
        for (auto& p : c.points) {
            p.ber = p.bits ? static_cast<double>(p.bit_errors) / static_cast<double>(p.bits) : 0.0;
            p.ci = wilson_interval(p.bit_errors, p.bits);
        }
    }
    return curves;
}

std::optional<double> snr_at_ber(const BerCurve& curve, double target) {
    const auto& p = curve.points;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        if (p[i].ber >= target && p[i + 1].ber < target) {
            if (p[i + 1].ber <= 0.0 || p[i].ber <= 0.0) {
                return std::nullopt;
            }
            const double l0 = std::log10(p[i].ber), l1 = std::log10(p[i + 1].ber), lt = std::log10(target);
            return p[i].snr_db + (lt - l0) / (l1 - l0) * (p[i + 1].snr_db - p[i].snr_db);
        }
    }
    return std::nullopt;
}

bool monotone_within_ci(const BerCurve& curve) {
    const auto& p = curve.points;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            if (p[j].snr_db > p[i].snr_db && p[j].ci.lo > p[i].ci.hi) {
                return false;
            }
        }
    }
    return true;
}

bool left_of_within_ci(const BerCurve& left, const BerCurve& right) {
    for (const auto& a : left.points) {
        for (const auto& b : right.points) {
            if (a.snr_db == b.snr_db && a.ci.lo > b.ci.hi) {
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------- output

std::string fingerprint(std::string_view text) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(text);
    return os.str();
}

std::string to_json(const PaprReport& r, bool include_windows) {
    json j;
    j["window_us"] = r.window_us;
    j["window_samples"] = r.window_samples;
    j["windows"] = r.window_papr_db.size();
    j["zero_windows"] = r.zero_windows;
    j["dropped_samples"] = r.dropped_samples;
    j["percentiles_db"] = {{"p50", r.p50}, {"p80", r.p80}, {"p99", r.p99}};
    const std::vector<double> th{3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    j["ccdf"] = {{"threshold_db", th}, {"prob", r.ccdf(th)}};
    if (include_windows) {
        j["window_papr_db"] = r.window_papr_db;
    }
    return j.dump(2);
}

std::string to_csv(const PaprReport& r) {
    std::vector<double> s = r.window_papr_db;
    std::sort(s.begin(), s.end());
    std::ostringstream os;
    os << "papr_db,ccdf\n";
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << s[i] << ',' << (n - static_cast<double>(i) - 1.0) / n << '\n';
    }
    return os.str();
}

std::string to_json(const PsdReport& r) {
    json j;
    j["resolution_hz"] = r.resolution_hz;
    j["segments"] = r.segments;
    j["total_power"] = r.total_power();
    json mask = json::array();
    for (const auto& m : r.mask) {
        mask.push_back({{"offset_hz", m.offset_hz}, {"limit_dbr", m.limit_dbr}});
    }
    j["mask"] = mask;
    if (r.sem) {
        j["sem"] = {{"pass", r.sem->pass}, {"margin_db", r.sem->margin_db}, {"worst_freq_hz", r.sem->worst_freq_hz}};
    }
    return j.dump(2);
}

std::string to_csv(const PsdReport& r) {
    std::ostringstream os;
    os << std::setprecision(10) << "freq_hz,psd_dbr" << (r.mask.empty() ? "" : ",mask_dbr") << '\n';
    for (std::size_t i = 0; i < r.freq_hz.size(); ++i) {
        os << r.freq_hz[i] << ',' << r.psd_dbr[i];
        if (!r.mask.empty()) {
            os << ',' << mask_limit(r.mask, r.freq_hz[i]);
        }
        os << '\n';
    }
    return os.str();
}

std::string to_json(const std::vector<BerCurve>& curves) {
    json arr = json::array();
    for (const auto& c : curves) {
        json pts = json::array();
        for (const auto& p : c.points) {
            pts.push_back({{"snr_db", p.snr_db},
                           {"bit_errors", p.bit_errors},
                           {"bits", p.bits},
                           {"ber", p.ber},
                           {"ci_low", p.ci.lo},
                           {"ci_high", p.ci.hi}});
        }
        arr.push_back({{"method", c.method},
                       {"rates", c.rates},
                       {"rate", to_string(c.rate)},
                       {"fingerprint", c.fingerprint},
                       {"points", pts}});
    }
    return arr.dump(2);
}

std::string to_csv(const std::vector<BerCurve>& curves) {
    std::ostringstream os;
    os << std::setprecision(10) << "method,rates,rate,snr_db,bit_errors,bits,ber,ci_low,ci_high\n";
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            os << c.method << ',' << c.rates << ',' << to_string(c.rate) << ',' << p.snr_db << ',' << p.bit_errors
               << ',' << p.bits << ',' << p.ber << ',' << p.ci.lo << ',' << p.ci.hi << '\n';
        }
    }
    return os.str();
}

} // namespace wurook
