#include "wurook/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wurook/fft.hpp"

namespace wurook {

namespace {

constexpr int kNumShifts = 8;

bool is_integral(double v) { return std::abs(v - std::round(v)) < 1e-6; }

Bits channel_slots(const ChannelConfig& c, std::span<const std::uint8_t> sync, std::size_t& sync_slots) {
    Bits s;
    if (c.rate == Rate::kInactive) {
        sync_slots = 0;
        return s;
    }
    s.assign(sync.begin(), sync.end());
    if (c.rate == Rate::kLdr) {
        for (auto b : sync) {
            s.push_back(b ? 0 : 1);
        }
    }
    sync_slots = s.size();
    const Bits enc = wur_encode(c.payload, c.rate);
    s.insert(s.end(), enc.begin(), enc.end());
    return s;
}

void check_sync(std::span<const std::uint8_t> sync) {
    if (sync.size() != 32) {
        throw ConfigError("SYNC sequence must have 32 bits, got " + std::to_string(sync.size()));
    }
    for (auto b : sync) {
        if (b > 1) {
            throw ConfigError("SYNC sequence must be binary");
        }
    }
}

/// Fills the common part of the layout from the per-channel slot plans.
PacketLayout make_layout(const WaveformParams& params, const ChannelPlan& plan, std::span<const std::uint8_t> sync) {
    PacketLayout layout;
    layout.sample_rate = params.sample_rate();
    layout.slot_samples = params.slot_samples();
    layout.legacy_samples = params.legacy_samples();
    layout.all_inactive = plan.all_inactive();
    std::size_t max_sync = 0;
    for (std::size_t ch = 0; ch < 4; ++ch) {
        auto& t = layout.channels[ch];
        t.rate = plan.channels[ch].rate;
        t.slots = channel_slots(plan.channels[ch], sync, t.sync_slots);
        t.payload_bits = plan.channels[ch].payload.size();
        layout.total_slots = std::max(layout.total_slots, t.slots.size());
        max_sync = std::max(max_sync, t.sync_slots);
    }
    if (layout.all_inactive) {
        // Silence for the duration of an HDR SYNC field.
        layout.total_slots = sync.size();
        max_sync = sync.size();
    }
    layout.segments.push_back({"legacy", 0, layout.legacy_samples});
    layout.segments.push_back({"sync", layout.slot_start(0), max_sync * layout.slot_samples});
    layout.segments.push_back(
        {"data", layout.slot_start(max_sync), (layout.total_slots - max_sync) * layout.slot_samples});
    return layout;
}

std::vector<cf64> placeholder_legacy(const WaveformParams& params) {
    // Non-HT duplicate style: 52 BPSK tones per 20 MHz block, 3.2 us IDFT + 0.8 us CP.
    const double fs = params.sample_rate();
    const double n_fft_d = 3.2e-6 * fs;
    const double n_cp_d = 0.8e-6 * fs;
    const std::size_t total = params.legacy_samples();
    if (!is_integral(n_fft_d) || !is_integral(n_cp_d)) {
        return std::vector<cf64>(total);
    }
    const auto n_fft = static_cast<std::size_t>(std::llround(n_fft_d));
    const auto n_cp = static_cast<std::size_t>(std::llround(n_cp_d));
    // Channel centres are in base bins; legacy tones sit on a grid twice as fine.
    const double tone_spacing = 1.0 / 3.2e-6;
    const double base_spacing = params.base_rate / static_cast<double>(params.idft_size);
    const double ratio = base_spacing / tone_spacing;
    std::mt19937_64 rng(0x1e9ac7);
    Fft fft(n_fft);
    std::vector<cf64> out;
    out.reserve(total);
    const std::array<double, 4> gamma{1.0, -1.0, -1.0, -1.0};
    std::vector<cf64> grid(n_fft), time(n_fft);
    while (out.size() < total) {
        std::fill(grid.begin(), grid.end(), cf64{});
        for (std::size_t ch = 0; ch < 4; ++ch) {
            const long long centre = std::llround(params.channel_center_bins[ch] * ratio);
            for (int k = -26; k <= 26; ++k) {
                if (k == 0) {
                    continue;
                }
                const long long bin = centre + k;
                if (bin <= -static_cast<long long>(n_fft) / 2 || bin >= static_cast<long long>(n_fft) / 2) {
                    continue;
                }
                const double v = (rng() & 1u) ? 1.0 : -1.0;
                grid[static_cast<std::size_t>((bin + static_cast<long long>(n_fft)) % static_cast<long long>(n_fft))] =
                    v * gamma[ch];
            }
        }
        fft.inverse_unitary(grid, time);
        for (std::size_t i = 0; i < n_cp && out.size() < total; ++i) {
            out.push_back(time[n_fft - n_cp + i]);
        }
        for (std::size_t i = 0; i < n_fft && out.size() < total; ++i) {
            out.push_back(time[i]);
        }
    }
    return out;
}

/// Prepends the legacy segment, matched to the mean ON power of the WUR part.
IqSignal attach_legacy(const WaveformParams& params, const LegacyStub& legacy, std::vector<cf64> wur,
                       double fallback_power) {
    const std::size_t n_legacy = params.legacy_samples();
    double acc = 0.0;
    std::size_t on = 0;
    for (const auto& x : wur) {
        const double p = std::norm(x);
        if (p > 0.0) {
            acc += p;
            ++on;
        }
    }
    const double target = on > 0 ? acc / static_cast<double>(on) : fallback_power;

    std::vector<cf64> head;
    switch (legacy.mode) {
    case LegacyStub::Mode::kSilence:
        head.assign(n_legacy, cf64{});
        break;
    case LegacyStub::Mode::kSamples:
        if (legacy.samples.size() != n_legacy) {
            throw ConfigError("legacy samples: expected " + std::to_string(n_legacy) + " samples, got " +
                              std::to_string(legacy.samples.size()));
        }
        head = legacy.samples;
        break;
    case LegacyStub::Mode::kPlaceholder:
        head = placeholder_legacy(params);
        break;
    }
    double hp = 0.0;
    for (const auto& x : head) {
        hp += std::norm(x);
    }
    if (hp > 0.0) {
        const double g = std::sqrt(target / (hp / static_cast<double>(head.size())));
        for (auto& x : head) {
            x *= g;
        }
    }
    head.insert(head.end(), wur.begin(), wur.end());
    return IqSignal(std::move(head), params.sample_rate());
}

void synthesize(std::span<const cf64> grid, int shift, std::size_t cp, std::span<cf64> out, const Fft& fft) {
    const std::size_t m = grid.size();
    std::vector<cf64> time(m);
    fft.inverse_unitary(grid, time);
    const std::size_t rot = static_cast<std::size_t>(shift) * (m / kNumShifts);
    std::rotate(time.begin(), time.end() - static_cast<long>(rot), time.end());
    std::copy(time.end() - static_cast<long>(cp), time.end(), out.begin());
    std::copy(time.begin(), time.end(), out.begin() + static_cast<long>(cp));
}

} // namespace

// ---------------------------------------------------------------------------

void WaveformParams::validate() const {
    if (!is_pow2(idft_size)) {
        throw ConfigError("idft_size must be a power of two");
    }
    if (cp_len >= idft_size) {
        throw ConfigError("cp_len must be smaller than idft_size");
    }
    if (oversample < 1) {
        throw ConfigError("oversample must be >= 1");
    }
    if (!(base_rate > 0.0)) {
        throw ConfigError("base_rate must be positive");
    }
    if (fft_size() % kNumShifts != 0) {
        throw ConfigError("idft_size * oversample must be divisible by 8 for the cyclic shifts");
    }
    if (!(legacy_duration >= 0.0) || !is_integral(legacy_duration * sample_rate())) {
        throw ConfigError("legacy_duration must be a whole number of samples");
    }
    const long long half = static_cast<long long>(idft_size) / 2;
    std::array<std::pair<long long, long long>, 4> span{};
    for (std::size_t ch = 0; ch < 4; ++ch) {
        const long long c = channel_center_bins[ch];
        if (c - 3 <= -half || c + 3 >= half) {
            throw ConfigError("channel " + std::to_string(ch + 1) + " footprint does not fit in the IDFT");
        }
        span[ch] = {c - 3, c + 3};
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            if (span[i].first <= span[j].second && span[j].first <= span[i].second) {
                throw ConfigError("channel footprints " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                  " overlap");
            }
        }
    }
}

std::size_t WaveformParams::legacy_samples() const {
    return static_cast<std::size_t>(std::llround(legacy_duration * sample_rate()));
}

double WaveformParams::channel_center_hz(std::size_t ch) const {
    return channel_center_bins.at(ch) * base_rate / static_cast<double>(idft_size);
}

ChannelPlan ChannelPlan::from_rates(std::string_view rates) {
    if (rates.size() != 4) {
        throw ConfigError("rate string must have 4 characters, e.g. \"LLHH\"");
    }
    ChannelPlan p;
    for (std::size_t ch = 0; ch < 4; ++ch) {
        p.channels[ch].rate = rate_from_string(std::string(1, rates[ch]));
    }
    return p;
}

std::string ChannelPlan::rates_string() const {
    std::string s;
    for (const auto& c : channels) {
        s.push_back(c.rate == Rate::kHdr ? 'H' : c.rate == Rate::kLdr ? 'L' : 'X');
    }
    return s;
}

bool ChannelPlan::all_inactive() const {
    return std::all_of(channels.begin(), channels.end(), [](const auto& c) { return c.rate == Rate::kInactive; });
}

void ChannelPlan::validate() const {
    for (std::size_t ch = 0; ch < 4; ++ch) {
        const auto& c = channels[ch];
        if (c.rate == Rate::kInactive && !c.payload.empty()) {
            throw ConfigError("channel " + std::to_string(ch + 1) + " is inactive but has a payload");
        }
        for (auto b : c.payload) {
            if (b > 1) {
                throw ConfigError("channel " + std::to_string(ch + 1) + " payload is not binary");
            }
        }
    }
}

Bits wur_encode(std::span<const std::uint8_t> bits, Rate rate) {
    static constexpr std::array<std::uint8_t, 8> kLdrZero{1, 1, 0, 0, 1, 1, 0, 0};
    Bits out;
    if (rate == Rate::kInactive) {
        if (!bits.empty()) {
            throw std::invalid_argument("wur_encode: inactive channel cannot carry bits");
        }
        return out;
    }
    out.reserve(bits.size() * (rate == Rate::kHdr ? 2 : 8));
    for (auto b : bits) {
        if (rate == Rate::kHdr) {
            out.push_back(b ? 0 : 1);
            out.push_back(b ? 1 : 0);
        } else {
            for (auto s : kLdrZero) {
                out.push_back(b ? 1 - s : s);
            }
        }
    }
    return out;
}

Bits bits_from_string(std::string_view s) {
    Bits b;
    for (char c : s) {
        if (c != '0' && c != '1') {
            throw ConfigError("bit string must contain only 0/1");
        }
        b.push_back(c == '1');
    }
    return b;
}

std::string bits_to_string(std::span<const std::uint8_t> b) {
    std::string s;
    for (auto v : b) {
        s.push_back(v ? '1' : '0');
    }
    return s;
}

std::size_t PacketLayout::data_begin_slot() const {
    std::size_t s = 0;
    for (const auto& c : channels) {
        s = std::max(s, c.sync_slots);
    }
    return s;
}

const Segment& PacketLayout::segment(std::string_view name) const {
    for (const auto& s : segments) {
        if (s.name == name) {
            return s;
        }
    }
    throw std::out_of_range("PacketLayout: no segment named " + std::string(name));
}

std::vector<cf64> map_to_grid(const ChannelSequenceSet& set, const WaveformParams& params) {
    params.validate();
    return embed_on_grid(set, params.channel_center_bins, params.fft_size());
}

IqSignal ofdm_symbol(std::span<const cf64> grid, int cyclic_shift, const WaveformParams& params) {
    if (cyclic_shift < 0 || cyclic_shift >= kNumShifts) {
        throw std::out_of_range("ofdm_symbol: cyclic shift must be in 0..7");
    }
    if (grid.size() != params.fft_size()) {
        throw std::invalid_argument("ofdm_symbol: grid size must equal idft_size * oversample");
    }
    Fft fft(grid.size());
    std::vector<cf64> out(params.slot_samples());
    synthesize(grid, cyclic_shift, params.cp_samples(), out, fft);
    return IqSignal(std::move(out), params.sample_rate());
}

// ---------------------------------------------------------------------------

GolayTransmitter::GolayTransmitter(WaveformParams params, GolayOptions options) : params_(std::move(params)) {
    params_.validate();
    AllocationGeometry geom;
    geom.center_bins = params_.channel_center_bins;
    geom.fft_size = std::max<std::size_t>(params_.idft_size * 16, params_.fft_size());
    for (int idx = 0; idx < 16; ++idx) {
        const auto pat = pattern_from_index(idx);
        if (is_starred(pat) && options.starred == StarredPhases::kSearched) {
            sets_[idx] = qpsk_phase_search(pat, geom, options.base).set;
        } else {
            sets_[idx] = table1_select(pat, options.base, options.table);
        }
    }
    const std::size_t slot = params_.slot_samples();
    bank_.assign(16 * kNumShifts * slot, cf64{});
    Fft fft(params_.fft_size());
    for (int idx = 1; idx < 16; ++idx) {
        const auto grid = map_to_grid(sets_[idx], params_);
        for (int s = 0; s < kNumShifts; ++s) {
            std::span<cf64> dst(bank_.data() + (static_cast<std::size_t>(idx) * kNumShifts + s) * slot, slot);
            synthesize(grid, s, params_.cp_samples(), dst, fft);
        }
    }
}

std::span<const cf64> GolayTransmitter::symbol(int pattern_idx, int shift) const {
    if (pattern_idx < 0 || pattern_idx > 15 || shift < 0 || shift >= kNumShifts) {
        throw std::out_of_range("GolayTransmitter::symbol: index out of range");
    }
    const std::size_t slot = params_.slot_samples();
    return {bank_.data() + (static_cast<std::size_t>(pattern_idx) * kNumShifts + shift) * slot, slot};
}

Packet GolayTransmitter::build(const ChannelPlan& plan, std::span<const std::uint8_t> sync, LfsrState lfsr,
                               const LegacyStub& legacy) const {
    plan.validate();
    check_sync(sync);
    lfsr.validate();
    Packet pkt;
    auto& layout = pkt.layout;
    layout = make_layout(params_, plan, sync);
    const double on_power = 6.0 / static_cast<double>(params_.fft_size());
    for (auto& t : layout.channels) {
        t.on_power = t.rate == Rate::kInactive ? 0.0 : on_power;
    }

    const std::size_t slot = params_.slot_samples();
    std::vector<cf64> wur(layout.total_slots * slot);
    int prev_shift = -1;
    for (std::size_t t = 0; t < layout.total_slots; ++t) {
        ChannelPattern pat{};
        bool repeat = false;
        for (std::size_t ch = 0; ch < 4; ++ch) {
            const auto& ct = layout.channels[ch];
            if (t >= ct.slots.size() || !ct.slots[t]) {
                continue;
            }
            pat[ch] = true;
            // Second half of an LDR ON pair in the payload.
            if (ct.rate == Rate::kLdr && t >= ct.sync_slots && (t - ct.sync_slots) % 2 == 1 &&
                plan.channels[ch].ldr_second == LdrSecondSymbol::kRepeat) {
                repeat = true;
            }
        }
        const int idx = pattern_index(pat);
        if (idx == 0) {
            prev_shift = -1;
            continue;
        }
        int shift = prev_shift;
        if (!repeat || prev_shift < 0) {
            std::tie(shift, lfsr) = lfsr_next3(lfsr);
        }
        prev_shift = shift;
        layout.shifts.push_back({-1, t, shift});
        const auto sym = symbol(idx, shift);
        std::copy(sym.begin(), sym.end(), wur.begin() + static_cast<long>(t * slot));
    }
    pkt.signal = attach_legacy(params_, legacy, std::move(wur), on_power);
    return pkt;
}

// ---------------------------------------------------------------------------

BaselineSequences default_baseline(int example_id) {
    // Placeholder sequences (random QPSK with a null centre tone); example 2
    // has the lowest single-channel PAPR and example 3 the highest of the random draws.
    BaselineSequences s;
    s.example_id = example_id;
    switch (example_id) {
    case 0:
        // All-ones tones: coherent peaks, a deliberately high-PAPR configuration.
        s.hdr = ComplexSeq::parse("+++0+++");
        s.ldr = ComplexSeq::parse("++++++0++++++");
        break;
    case 1:
        s.hdr = ComplexSeq::parse("ji+0iji");
        s.ldr = ComplexSeq::parse("+i-j-j0j+-i+-");
        break;
    case 2:
        s.hdr = ComplexSeq::parse("i-j0++j");
        s.ldr = ComplexSeq::parse("j+ijii0ii--++");
        break;
    case 3:
        s.hdr = ComplexSeq::parse("j--0i++");
        s.ldr = ComplexSeq::parse("++j-j-0j----j");
        break;
    default:
        throw ConfigError("baseline example id must be 0, 1, 2 or 3");
    }
    return s;
}

BaselineTransmitter::BaselineTransmitter(WaveformParams params, BaselineSequences seqs)
    : params_(std::move(params)), seqs_(std::move(seqs)) {
    params_.validate();
    if (seqs_.hdr.size() % 2 == 0 || seqs_.ldr.size() % 2 == 0) {
        throw ConfigError("baseline sequences must have odd length (centred on the DC tone)");
    }
    const std::size_t slot = params_.slot_samples();
    const std::size_t m_h = params_.fft_size();
    const std::size_t m_l = 2 * m_h;
    const long long nh = static_cast<long long>(m_h);
    const long long nl = static_cast<long long>(m_l);
    hdr_bank_.assign(4 * kNumShifts * slot, cf64{});
    ldr_bank_.assign(4 * kNumShifts * 2 * slot, cf64{});
    Fft fft_h(m_h);
    Fft fft_l(m_l);
    hdr_power_ = static_cast<double>(seqs_.hdr.energy()) / static_cast<double>(m_h);
    ldr_power_ = static_cast<double>(seqs_.ldr.energy()) / static_cast<double>(m_l);
    const long long half_base = static_cast<long long>(params_.idft_size) / 2;
    for (std::size_t ch = 0; ch < 4; ++ch) {
        std::vector<cf64> gh(m_h), gl(m_l);
        const long long ch_c = params_.channel_center_bins[ch];
        const long long hh = static_cast<long long>(seqs_.hdr.size() / 2);
        for (std::size_t j = 0; j < seqs_.hdr.size(); ++j) {
            const long long bin = ch_c - hh + static_cast<long long>(j);
            if (bin <= -half_base || bin >= half_base) {
                throw ConfigError("baseline HDR sequence leaves the IDFT band");
            }
            gh[static_cast<std::size_t>((bin + nh) % nh)] = seqs_.hdr[j].to_complex() * seqs_.gamma[ch];
        }
        const long long hl = static_cast<long long>(seqs_.ldr.size() / 2);
        for (std::size_t j = 0; j < seqs_.ldr.size(); ++j) {
            const long long bin = 2 * ch_c - hl + static_cast<long long>(j);
            if (bin <= -2 * half_base || bin >= 2 * half_base) {
                throw ConfigError("baseline LDR sequence leaves the IDFT band");
            }
            gl[static_cast<std::size_t>((bin + nl) % nl)] = seqs_.ldr[j].to_complex() * seqs_.gamma[ch];
        }
        for (int s = 0; s < kNumShifts; ++s) {
            std::span<cf64> dh(hdr_bank_.data() + (ch * kNumShifts + s) * slot, slot);
            synthesize(gh, s, params_.cp_samples(), dh, fft_h);
            std::span<cf64> dl(ldr_bank_.data() + (ch * kNumShifts + s) * 2 * slot, 2 * slot);
            synthesize(gl, s, 2 * params_.cp_samples(), dl, fft_l);
        }
    }
}

std::span<const cf64> BaselineTransmitter::hdr_symbol(std::size_t ch, int shift) const {
    const std::size_t slot = params_.slot_samples();
    return {hdr_bank_.data() + (ch * kNumShifts + static_cast<std::size_t>(shift)) * slot, slot};
}

std::span<const cf64> BaselineTransmitter::ldr_symbol(std::size_t ch, int shift) const {
    const std::size_t slot = params_.slot_samples();
    return {ldr_bank_.data() + (ch * kNumShifts + static_cast<std::size_t>(shift)) * 2 * slot, 2 * slot};
}

Packet BaselineTransmitter::build(const ChannelPlan& plan, std::span<const std::uint8_t> sync, LfsrState lfsr,
                                  const LegacyStub& legacy) const {
    plan.validate();
    check_sync(sync);
    lfsr.validate();
    Packet pkt;
    auto& layout = pkt.layout;
    layout = make_layout(params_, plan, sync);
    const std::size_t slot = params_.slot_samples();
    std::vector<cf64> wur(layout.total_slots * slot);
    for (std::size_t ch = 0; ch < 4; ++ch) {
        auto& ct = layout.channels[ch];
        if (ct.rate == Rate::kInactive) {
            continue;
        }
        ct.on_power = ct.rate == Rate::kLdr ? ldr_power_ : hdr_power_;
        const std::uint64_t period = (1ull << lfsr.width) - 1ull;
        LfsrState reg = lfsr;
        reg.reg = static_cast<std::uint32_t>((lfsr.reg - 1 + 37ull * ch) % period) + 1u;
        std::size_t t = 0;
        while (t < ct.slots.size()) {
            if (!ct.slots[t]) {
                ++t;
                continue;
            }
            int shift = 0;
            std::tie(shift, reg) = lfsr_next3(reg);
            layout.shifts.push_back({static_cast<int>(ch), t, shift});
            // LDR payload ON pairs are one 4 us symbol; SYNC always uses the HDR symbol.
            const bool long_symbol = ct.rate == Rate::kLdr && t >= ct.sync_slots && t + 1 < ct.slots.size() &&
                                     ct.slots[t + 1] && (t - ct.sync_slots) % 2 == 0;
            const auto sym = long_symbol ? ldr_symbol(ch, shift) : hdr_symbol(ch, shift);
            auto dst = wur.begin() + static_cast<long>(t * slot);
            for (std::size_t i = 0; i < sym.size(); ++i) {
                dst[static_cast<long>(i)] += sym[i];
            }
            t += long_symbol ? 2 : 1;
        }
    }
    pkt.signal = attach_legacy(params_, legacy, std::move(wur), hdr_power_);
    return pkt;
}

Packet Transmitter::build(const ChannelPlan& plan, std::span<const std::uint8_t> sync, LfsrState lfsr,
                          const LegacyStub& legacy) const {
    return std::visit([&](const auto& t) { return t.build(plan, sync, lfsr, legacy); }, impl_);
}

const WaveformParams& Transmitter::params() const {
    return std::visit([](const auto& t) -> const WaveformParams& { return t.params(); }, impl_);
}

std::string Transmitter::name() const {
    if (const auto* b = std::get_if<BaselineTransmitter>(&impl_)) {
        return "baseline-" + std::to_string(b->sequences().example_id);
    }
    return "golay";
}

Packet build_packet(const ChannelPlan& plan, std::span<const std::uint8_t> sync, LfsrState lfsr,
                    const WaveformParams& params, const LegacyStub& legacy) {
    return GolayTransmitter(params).build(plan, sync, lfsr, legacy);
}

Packet baseline_packet(const ChannelPlan& plan, const BaselineSequences& seqs, std::span<const std::uint8_t> sync,
                       LfsrState lfsr, const WaveformParams& params, const LegacyStub& legacy) {
    return BaselineTransmitter(params, seqs).build(plan, sync, lfsr, legacy);
}

} // namespace wurook
