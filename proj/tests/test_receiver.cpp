#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wurook/receiver.hpp"

using namespace wurook;

namespace {

Bits random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Bits b(n);
    for (auto& v : b) {
        v = rng() & 1u;
    }
    return b;
}

double db(double x) { return 20.0 * std::log10(x); }

} // namespace

TEST_CASE("butterworth: response matches the bilinear Butterworth magnitude") {
    const double fs = 320e6, fc = 5e6;
    const auto f = butterworth_design(5, fc, fs);
    CHECK(f.order() == 5);
    CHECK(f.sections().size() == 3);
    CHECK(std::abs(f.response(0.0)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(db(std::abs(f.response(fc))) + 3.0103) < 0.1);
    CHECK(db(std::abs(f.response(2 * fc))) <= -30.0);
    CHECK(f.stable());
    CHECK(f.poles().size() == 5);
    // |H|^2 = 1 / (1 + (tan(pi f/fs) / tan(pi fc/fs))^(2n)) for a prewarped bilinear design.
    for (double fr : {1e6, 3e6, 4.9e6, 7e6, 12e6, 40e6}) {
        const double r = std::tan(std::numbers::pi * fr / fs) / std::tan(std::numbers::pi * fc / fs);
        const double ref = 1.0 / std::sqrt(1.0 + std::pow(r, 10));
        CHECK(std::abs(f.response(fr)) == doctest::Approx(ref).epsilon(1e-9));
    }
    CHECK_THROWS_AS(butterworth_design(5, 160e6, fs), ConfigError);
    CHECK_THROWS_AS(butterworth_design(0, 5e6, fs), ConfigError);
}

TEST_CASE("butterworth: DC group delay agrees with the phase slope") {
    const auto f = butterworth_design(5, 5e6, 320e6);
    const double df = 1e3;
    const double dphi = std::arg(f.response(df)) - std::arg(f.response(-df));
    const double tau = -dphi / (2.0 * std::numbers::pi * 2.0 * df / 320e6);
    CHECK(f.group_delay_dc() == doctest::Approx(tau).epsilon(1e-4));
    // Impulse-response centroid gives the same value.
    std::vector<cf64> imp(4000);
    imp[0] = 1.0;
    f.apply(imp, imp);
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t n = 0; n < imp.size(); ++n) {
        m0 += imp[n].real();
        m1 += static_cast<double>(n) * imp[n].real();
    }
    CHECK(f.group_delay_dc() == doctest::Approx(m1 / m0).epsilon(1e-6));
}

TEST_CASE("channelize: identity, in-channel tone, out-of-channel tone") {
    const double fs = 320e6;
    std::vector<cf64> x(20000);
    for (std::size_t n = 0; n < x.size(); ++n) {
        x[n] = std::polar(0.7, 0.3 + 0.001 * static_cast<double>(n));
    }
    IqSignal s(x, fs);
    const auto id = channelize(s, 0.0, IirFilter::identity(fs));
    CHECK(id.samples == s.samples);

    const auto f = butterworth_design(5, 5e6, fs);
    const double fc = 30e6;
    std::vector<cf64> tone(20000), far(20000);
    for (std::size_t n = 0; n < tone.size(); ++n) {
        const double t = static_cast<double>(n) / fs;
        tone[n] = std::polar(1.0, 2.0 * std::numbers::pi * fc * t);
        far[n] = std::polar(1.0, 2.0 * std::numbers::pi * (fc + 20e6) * t);
    }
    const auto y = channelize(IqSignal(tone, fs), fc, f);
    const auto yf = channelize(IqSignal(far, fs), fc, f);
    // Steady state after the transient.
    for (std::size_t n = 10000; n < 20000; n += 997) {
        CHECK(std::abs(y.samples[n] - cf64(1.0, 0.0)) < 1e-6);
        CHECK(db(std::abs(yf.samples[n])) <= -30.0);
    }
    const auto yd = channelize(IqSignal(tone, fs), fc, f, 4);
    CHECK(yd.size() == 5000);
    CHECK(yd.sample_rate == doctest::Approx(80e6));
    CHECK(yd.samples[3000] == y.samples[12000]);
}

TEST_CASE("envelope_decode: HDR decisions and half-slot swap") {
    const WaveformParams p;
    const GolayTransmitter tx(p);
    auto plan = ChannelPlan::from_rates("HXXX");
    plan.channels[0].payload = {0, 1};
    auto pkt = tx.build(plan, bits_from_string(kDefaultSyncWord), LfsrState{});
    const auto d = envelope_decode(pkt.signal, pkt.layout, 0);
    REQUIRE(d.bits.size() == 2);
    CHECK(d.bits[0] == 0);
    CHECK(d.bits[1] == 1);
    CHECK(d.margins[0] > 0.0);
    // Swap the halves of bit 0.
    const auto a = pkt.layout.slot_start(32), b = pkt.layout.slot_start(33);
    std::swap_ranges(pkt.signal.samples.begin() + static_cast<long>(a), pkt.signal.samples.begin() + static_cast<long>(b),
                     pkt.signal.samples.begin() + static_cast<long>(b));
    CHECK(envelope_decode(pkt.signal, pkt.layout, 0).bits[0] == 1);

    IqSignal cut = pkt.signal;
    cut.samples.resize(cut.size() - 10);
    CHECK_THROWS_AS(envelope_decode(cut, pkt.layout, 0), ConfigError);
}

TEST_CASE("receiver: noise-free loopback, scale and phase invariance") {
    const WaveformParams p;
    const GolayTransmitter tx(p);
    const WurReceiver rx(ReceiverConfig{}, p.sample_rate());
    CHECK(rx.offset_samples() == std::lround(rx.filter().group_delay_dc()));
    auto plan = ChannelPlan::from_rates("LLHH");
    plan.channels[0].payload = random_bits(25, 1);
    plan.channels[1].payload = random_bits(25, 2);
    plan.channels[2].payload = random_bits(116, 3);
    plan.channels[3].payload = random_bits(116, 4);
    const auto pkt = tx.build(plan, bits_from_string(kDefaultSyncWord), lfsr_from_seed(5));
    std::array<EnvelopeDecision, 4> ref;
    for (std::size_t ch = 0; ch < 4; ++ch) {
        ref[ch] = rx.decode(pkt.signal, pkt.layout, ch, p.channel_center_hz(ch));
        CHECK(ref[ch].bits == plan.channels[ch].payload);
    }
    for (int k = 0; k < 16; ++k) {
        const cf64 rot = std::polar(k == 0 ? 3.5 : 1.0, 2.0 * std::numbers::pi * k / 16.0);
        IqSignal s = pkt.signal;
        for (auto& v : s.samples) {
            v *= rot;
        }
        for (std::size_t ch = 0; ch < 4; ++ch) {
            const auto d = rx.decode(s, pkt.layout, ch, p.channel_center_hz(ch));
            CHECK(d.bits == plan.channels[ch].payload);
            if (k == 0) {
                for (std::size_t i = 0; i < d.margins.size(); ++i) {
                    CHECK(d.margins[i] == doctest::Approx(3.5 * ref[ch].margins[i]).epsilon(1e-9));
                }
            }
        }
    }
    const auto js = to_json(ref[2]);
    CHECK(js.find("\"rate\": \"HDR\"") != std::string::npos);
}
