#include "wurook/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

namespace wurook {

IirFilter::IirFilter(std::vector<Biquad> sections, int order, double cutoff_hz, double rate_hz)
    : sections_(std::move(sections)), order_(order), cutoff_hz_(cutoff_hz), rate_hz_(rate_hz) {}

IirFilter IirFilter::identity(double rate_hz) { return IirFilter({}, 0, rate_hz / 2.0, rate_hz); }

cf64 IirFilter::response(double f_hz) const {
    const cf64 z1 = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / rate_hz_);
    const cf64 z2 = z1 * z1;
    cf64 h{1.0, 0.0};
    for (const auto& s : sections_) {
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    }
    return h;
}

double IirFilter::group_delay_dc() const {
    // For H = B/A at w = 0: tau = sum k b_k / sum b_k - sum k a_k / sum a_k.
    double tau = 0.0;
    for (const auto& s : sections_) {
        tau += (s.b1 + 2.0 * s.b2) / (s.b0 + s.b1 + s.b2);
        tau -= (s.a1 + 2.0 * s.a2) / (1.0 + s.a1 + s.a2);
    }
    return tau;
}

double IirFilter::noise_gain() const {
    // Impulse response until the tail energy is negligible.
    double total = 0.0;
    std::size_t len = 4096;
    for (int round = 0; round < 8; ++round) {
        std::vector<cf64> imp(len);
        imp[0] = 1.0;
        apply(imp, imp);
        double head = 0.0, tail = 0.0;
        for (std::size_t n = 0; n < len; ++n) {
            (n < len / 2 ? head : tail) += std::norm(imp[n]);
        }
        total = head + tail;
        if (tail <= 1e-15 * total) {
            break;
        }
        len *= 4;
    }
    return total;
}

std::vector<cf64> IirFilter::poles() const {
    std::vector<cf64> p;
    for (const auto& s : sections_) {
        if (s.a2 == 0.0) {
            if (s.a1 != 0.0) {
                p.emplace_back(-s.a1, 0.0);
            }
            continue;
        }
        const cf64 disc = std::sqrt(cf64(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
        p.push_back((-s.a1 + disc) / 2.0);
        p.push_back((-s.a1 - disc) / 2.0);
    }
    return p;
}

bool IirFilter::stable() const {
    const auto p = poles();
    return std::all_of(p.begin(), p.end(), [](cf64 z) { return std::abs(z) < 1.0; });
}

void IirFilter::apply(std::span<const cf64> in, std::span<cf64> out) const {
    if (out.size() < in.size()) {
        throw std::invalid_argument("IirFilter::apply: output too short");
    }
    if (out.data() != in.data()) {
        std::copy(in.begin(), in.end(), out.begin());
    }
    for (const auto& s : sections_) {
        cf64 w1{}, w2{};
        for (std::size_t n = 0; n < in.size(); ++n) {
            const cf64 x = out[n];
            const cf64 y = s.b0 * x + w1;
            w1 = s.b1 * x - s.a1 * y + w2;
            w2 = s.b2 * x - s.a2 * y;
            out[n] = y;
        }
    }
}

IirFilter butterworth_design(int order, double cutoff_hz, double rate_hz) {
    if (order < 1) {
        throw ConfigError("butterworth_design: order must be >= 1");
    }
    if (!(rate_hz > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < rate_hz / 2.0)) {
        throw ConfigError("butterworth_design: cutoff must lie strictly between 0 and Nyquist");
    }
    const double fs2 = 2.0 * rate_hz;
    const double wc = fs2 * std::tan(std::numbers::pi * cutoff_hz / rate_hz);
    std::vector<Biquad> sos;
    const int n = order;
    for (int k = 0; k < n / 2; ++k) {
        const cf64 s = wc * std::polar(1.0, std::numbers::pi * (2.0 * k + n + 1.0) / (2.0 * n));
        const cf64 z = (fs2 + s) / (fs2 - s);
        Biquad b;
        b.a1 = -2.0 * z.real();
        b.a2 = std::norm(z);
        const double g = (1.0 + b.a1 + b.a2) / 4.0;
        b.b0 = g;
        b.b1 = 2.0 * g;
        b.b2 = g;
        sos.push_back(b);
    }
    if (n % 2 == 1) {
        const double z = (fs2 - wc) / (fs2 + wc);
        Biquad b;
        b.a1 = -z;
        b.b0 = b.b1 = (1.0 - z) / 2.0;
        sos.push_back(b);
    }
    return IirFilter(std::move(sos), order, cutoff_hz, rate_hz);
}

IqSignal channelize(const IqSignal& signal, double center_hz, const IirFilter& filter, std::size_t decimation) {
    if (!(std::abs(center_hz) < signal.sample_rate / 2.0)) {
        throw ConfigError("channelize: centre frequency outside the sampled band");
    }
    if (decimation == 0) {
        throw ConfigError("channelize: decimation must be >= 1");
    }
    std::vector<cf64> y(signal.size());
    const double w = -2.0 * std::numbers::pi * center_hz / signal.sample_rate;
    if (center_hz == 0.0) {
        std::copy(signal.samples.begin(), signal.samples.end(), y.begin());
    } else {
        // Phasor recurrence, re-anchored every block to bound drift.
        constexpr std::size_t kBlock = 1024;
        const cf64 step = std::polar(1.0, w);
        for (std::size_t n0 = 0; n0 < y.size(); n0 += kBlock) {
            cf64 ph = std::polar(1.0, w * static_cast<double>(n0));
            const std::size_t end = std::min(y.size(), n0 + kBlock);
            for (std::size_t n = n0; n < end; ++n) {
                y[n] = signal.samples[n] * ph;
                ph *= step;
            }
        }
    }
    filter.apply(y, y);
    if (decimation > 1) {
        std::size_t j = 0;
        for (std::size_t i = 0; i < y.size(); i += decimation) {
            y[j++] = y[i];
        }
        y.resize(j);
    }
    return IqSignal(std::move(y), signal.sample_rate / static_cast<double>(decimation));
}

EnvelopeDecision envelope_decode(const IqSignal& signal, const PacketLayout& layout, std::size_t ch,
                                 long offset_samples, std::size_t decimation, std::size_t origin) {
    if (ch >= 4) {
        throw std::out_of_range("envelope_decode: channel index");
    }
    const auto& ct = layout.channels[ch];
    EnvelopeDecision d;
    d.channel = ch;
    d.rate = ct.rate;
    if (ct.rate == Rate::kInactive) {
        return d;
    }
    if (decimation == 0 || layout.slot_samples % decimation != 0 || origin % decimation != 0) {
        throw ConfigError("envelope_decode: decimation must divide the slot length and origin");
    }
    const long slot_len = static_cast<long>(layout.slot_samples / decimation);
    const long size = static_cast<long>(signal.size());
    const std::size_t n_slots = ct.data_slots();
    d.slot_energy.resize(n_slots);
    for (std::size_t i = 0; i < n_slots; ++i) {
        const std::size_t abs_start = layout.slot_start(ct.sync_slots + i);
        const long start = (static_cast<long>(abs_start) - static_cast<long>(origin)) / static_cast<long>(decimation) +
                           offset_samples;
        if (abs_start < origin || start < 0 || start + slot_len > size) {
            throw ConfigError("envelope_decode: signal truncated (slot " + std::to_string(ct.sync_slots + i) +
                              " outside the received window)");
        }
        double e = 0.0;
        const cf64* p = signal.samples.data() + start;
        for (long k = 0; k < slot_len; ++k) {
            e += std::abs(p[k].real()) + std::abs(p[k].imag());
        }
        d.slot_energy[i] = e;
    }
    const std::size_t per_bit = ct.rate == Rate::kHdr ? 2 : 8;
    const auto& E = d.slot_energy;
    for (std::size_t b = 0; b + per_bit <= n_slots; b += per_bit) {
        double e0 = 0.0, e1 = 0.0;
        if (ct.rate == Rate::kHdr) {
            e0 = E[b];
            e1 = E[b + 1];
        } else {
            e0 = E[b] + E[b + 1] + E[b + 4] + E[b + 5];
            e1 = E[b + 2] + E[b + 3] + E[b + 6] + E[b + 7];
        }
        const bool one = e1 > e0;
        d.bits.push_back(one ? 1 : 0);
        d.margins.push_back(one ? e1 - e0 : e0 - e1);
    }
    return d;
}

std::string to_json(const EnvelopeDecision& d) {
    nlohmann::json j;
    j["channel"] = d.channel + 1;
    j["rate"] = to_string(d.rate);
    j["bits"] = bits_to_string(d.bits);
    j["margins"] = d.margins;
    j["slot_energy"] = d.slot_energy;
    return j.dump(2);
}

WurReceiver::WurReceiver(ReceiverConfig cfg, double sample_rate)
    : cfg_(cfg), filter_(butterworth_design(cfg.filter_order, cfg.cutoff_hz, sample_rate)) {
    if (cfg_.decimation == 0) {
        throw ConfigError("receiver decimation must be >= 1");
    }
    offset_ = cfg_.offset_samples ? *cfg_.offset_samples : std::lround(filter_.group_delay_dc());
}

EnvelopeDecision WurReceiver::decode(const IqSignal& rx, const PacketLayout& layout, std::size_t ch,
                                     double center_hz) const {
    const std::size_t need = layout.total_samples() + static_cast<std::size_t>(std::max(0L, offset_)) +
                             cfg_.decimation;
    const IqSignal* src = &rx;
    IqSignal padded;
    if (rx.size() < need) {
        padded = rx;
        padded.samples.resize(need);
        src = &padded;
    }
    const auto y = channelize(*src, center_hz, filter_, cfg_.decimation);
    const long off = offset_ / static_cast<long>(cfg_.decimation);
    return envelope_decode(y, layout, ch, off, cfg_.decimation, 0);
}

} // namespace wurook
