#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wurook/analysis.hpp"
#include "wurook/fft.hpp"

using namespace wurook;

TEST_CASE("nearest-rank percentiles") {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(percentile_nearest_rank(v, 50) == 5);
    CHECK(percentile_nearest_rank(v, 80) == 8);
    CHECK(percentile_nearest_rank(v, 99) == 10);
    CHECK(percentile_nearest_rank(v, 100) == 10);
    std::vector<double> one{4.2};
    CHECK(percentile_nearest_rank(one, 1) == 4.2);
    CHECK_THROWS_AS(percentile_nearest_rank(std::vector<double>{}, 50), InvariantError);
}

TEST_CASE("papr: constant envelope, two tones, scaling, zero windows") {
    const double fs = 320e6;
    std::vector<cf64> c(1280 * 3 + 7);
    for (std::size_t n = 0; n < c.size(); ++n) {
        c[n] = std::polar(2.0, 0.37 * static_cast<double>(n));
    }
    auto r = papr(IqSignal(c, fs), 1280);
    CHECK(r.window_papr_db.size() == 3);
    CHECK(r.dropped_samples == 7);
    CHECK(r.p99 == doctest::Approx(0.0).epsilon(1e-12));

    // Two equal tones whose period divides the window: peak 4A^2, mean 2A^2.
    std::vector<cf64> t(1280);
    for (std::size_t n = 0; n < t.size(); ++n) {
        const double ph = 2.0 * std::numbers::pi * static_cast<double>(n) / 1280.0;
        t[n] = std::polar(1.0, 5.0 * ph) + std::polar(1.0, 9.0 * ph);
    }
    r = papr(IqSignal(t, fs), 1280);
    CHECK(r.p50 == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
    for (auto& v : t) {
        v *= cf64(-3.0, 0.5);
    }
    CHECK(papr(IqSignal(t, fs), 1280).p50 == doctest::Approx(r.p50).epsilon(1e-12));

    std::vector<cf64> z(2560);
    z[1500] = 1.0;
    r = papr(IqSignal(z, fs), 1280);
    CHECK(r.zero_windows == 1);
    CHECK(r.window_papr_db.size() == 1);
    CHECK_THROWS_AS(papr(IqSignal(std::vector<cf64>(2560), fs), 1280), InvariantError);
}

TEST_CASE("papr: single f1 symbol is within the complementary bound") {
    // f1 = (+, i, +, 0, +, +, -) on a 16x oversampled grid.
    const auto f1 = parse_coeffs("+i+0++-");
    std::vector<cf64> grid(2048);
    for (std::size_t j = 0; j < f1.size(); ++j) {
        grid[(2048 + j - 3) % 2048] = f1[j].to_complex();
    }
    Fft fft(2048);
    std::vector<cf64> x(2048);
    fft.inverse_unitary(grid, x);
    CHECK(papr(IqSignal(x, 320e6), 2048).p50 <= 3.02);
}

TEST_CASE("papr_experiment: guards and determinism") {
    const Transmitter tx{GolayTransmitter(WaveformParams{})};
    PaprExperimentConfig cfg;
    cfg.rates = "XXXX";
    cfg.n_packets = 100;
    CHECK_THROWS_AS(papr_experiment(tx, cfg), InvariantError);
    cfg.rates = "XXHH";
    cfg.n_packets = 99;
    CHECK_THROWS_AS(papr_experiment(tx, cfg), ConfigError);
    cfg.n_packets = 120;
    const auto a = papr_experiment(tx, cfg);
    cfg.threads = 3;
    const auto b = papr_experiment(tx, cfg);
    CHECK(a.window_papr_db == b.window_papr_db);
    CHECK(a.p50 <= a.p80);
    CHECK(a.p80 <= a.p99);
    for (double v : a.window_papr_db) {
        CHECK(v >= 0.0);
    }
}

TEST_CASE("random_plan payload sizes") {
    const auto p = random_plan("LLHH", PayloadSpec{}, 3, 0);
    CHECK(p.channels[0].payload.size() == 4);
    CHECK(p.channels[2].payload.size() == 32);
    const auto q = random_plan("HXXH", PayloadSpec{}, 3, 0);
    CHECK(q.channels[0].payload.size() == 16);
    CHECK(q.channels[1].payload.empty());
    // Mixed plans end together.
    const GolayTransmitter tx{WaveformParams{}};
    const auto pkt = tx.build(p, bits_from_string(kDefaultSyncWord), LfsrState{});
    CHECK(pkt.layout.channels[0].slots.size() == pkt.layout.channels[2].slots.size());
}

TEST_CASE("psd_welch: tone, white noise, total power") {
    const double fs = 320e6;
    const std::size_t L = 1024;
    std::vector<cf64> tone(L * 20);
    const double f0 = 37.0 * fs / L;
    for (std::size_t n = 0; n < tone.size(); ++n) {
        tone[n] = std::polar(1.5, 2.0 * std::numbers::pi * f0 * static_cast<double>(n) / fs);
    }
    const auto pt = psd_welch(IqSignal(tone, fs), L, L / 2);
    const auto peak = std::max_element(pt.psd_dbr.begin(), pt.psd_dbr.end()) - pt.psd_dbr.begin();
    CHECK(pt.freq_hz[static_cast<std::size_t>(peak)] == doctest::Approx(f0));
    CHECK(pt.psd_dbr[static_cast<std::size_t>(peak)] == 0.0);
    CHECK(pt.total_power() == doctest::Approx(2.25).epsilon(0.01));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    std::vector<cf64> w(1000000);
    for (auto& v : w) {
        v = cf64(nd(rng), nd(rng));
    }
    const IqSignal ws(w, fs);
    const auto pw = psd_welch(ws, 256, 128);
    double lo = 1e300, hi = 0.0;
    for (double v : pw.psd) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(10.0 * std::log10(hi / lo) <= 2.0);
    const double mean = pw.total_power() / fs;
    for (double v : pw.psd) {
        CHECK(std::abs(10.0 * std::log10(v / mean)) <= 1.0);
    }
    CHECK(pw.total_power() == doctest::Approx(ws.mean_power()).epsilon(0.01));

    CHECK_THROWS_AS(psd_welch(IqSignal(std::vector<cf64>(100), fs), 256, 128), ConfigError);
    CHECK_THROWS_AS(psd_welch(ws, 256, 256), ConfigError);
}

TEST_CASE("spectral mask interpolation and sem_check") {
    const auto mask = load_mask(WUROOK_DATA_DIR "/sem_80mhz.csv");
    CHECK(mask_limit(mask, 0.0) == 0.0);
    CHECK(mask_limit(mask, -39e6) == 0.0);
    CHECK(mask_limit(mask, 40e6) == doctest::Approx(-10.0));
    CHECK(mask_limit(mask, -60.5e6) == doctest::Approx(-20.0 - 8.0 * 19.5 / 39.0));
    CHECK(mask_limit(mask, 100e6) == doctest::Approx(-34.0));
    CHECK(mask_limit(mask, 150e6) == -40.0);

    PsdReport r;
    for (int k = -160; k < 160; ++k) {
        r.freq_hz.push_back(k * 1e6);
    }
    r.psd_dbr.assign(r.freq_hz.size(), -100.0);
    auto s = sem_check(r, mask);
    CHECK(s.pass);

    for (std::size_t i = 0; i < r.freq_hz.size(); ++i) {
        r.psd_dbr[i] = mask_limit(mask, r.freq_hz[i]);
    }
    s = sem_check(r, mask);
    CHECK(s.pass);
    CHECK(s.margin_db == 0.0);

    const std::size_t bad = 160 + 70; // +70 MHz
    r.psd_dbr[bad] += 3.0;
    s = sem_check(r, mask);
    CHECK_FALSE(s.pass);
    CHECK(s.margin_db == doctest::Approx(-3.0));
    CHECK(s.worst_freq_hz == doctest::Approx(70e6));

    CHECK_THROWS_AS(parse_mask("5,0\n10,-20\n"), ConfigError);
}

TEST_CASE("wilson intervals") {
    // Reference values from the closed form evaluated independently.
    auto w = wilson_interval(0, 100);
    CHECK(w.lo == 0.0);
    CHECK(w.hi == doctest::Approx(0.036995).epsilon(1e-4));
    w = wilson_interval(50, 100);
    CHECK(w.lo == doctest::Approx(0.403832).epsilon(1e-4));
    CHECK(w.hi == doctest::Approx(0.596168).epsilon(1e-4));
    w = wilson_interval(0, 0);
    CHECK(w.lo == 0.0);
    CHECK(w.hi == 1.0);
}

TEST_CASE("curve helpers") {
    BerCurve c;
    auto pt = [](double s, std::uint64_t e, std::uint64_t n) {
        BerPoint p{s, e, n, static_cast<double>(e) / static_cast<double>(n), wilson_interval(e, n)};
        return p;
    };
    c.points = {pt(0, 1000, 100000), pt(2, 10, 100000), pt(4, 0, 100000)};
    CHECK(snr_at_ber(c, 1e-3).value() == doctest::Approx(1.0));
    CHECK_FALSE(snr_at_ber(c, 1e-6).has_value());
    CHECK(monotone_within_ci(c));
    BerCurve bad = c;
    bad.points[2] = pt(4, 500, 100000);
    CHECK_FALSE(monotone_within_ci(bad));
    CHECK(left_of_within_ci(c, bad));
    CHECK_FALSE(left_of_within_ci(bad, c));
}

TEST_CASE("ber_sweep: noise-free, small grid, thread independence") {
    const Transmitter tx{GolayTransmitter(WaveformParams{})};
    BerConfig cfg;
    cfg.rates = "LXHX";
    cfg.payload.ldr_bits = 16;
    cfg.snr_db = {kNoNoise};
    cfg.max_bits = 200;
    cfg.batch_packets = 2;
    cfg.calibration_packets = 2;
    auto curves = ber_sweep(tx, cfg);
    REQUIRE(curves.size() == 2);
    CHECK(curves[0].rate == Rate::kHdr);
    CHECK(curves[1].rate == Rate::kLdr);
    for (const auto& c : curves) {
        CHECK(c.points[0].bit_errors == 0);
        CHECK(c.points[0].bits >= 200);
        CHECK(c.points[0].ber == 0.0);
    }

    cfg.snr_db = {-4, 0, 4};
    cfg.max_bits = 600;
    cfg.min_errors = 50;
    curves = ber_sweep(tx, cfg);
    CHECK(curves[0].points.size() == 3);
    cfg.threads = 2;
    const auto again = ber_sweep(tx, cfg);
    for (std::size_t c = 0; c < curves.size(); ++c) {
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(again[c].points[i].bit_errors == curves[c].points[i].bit_errors);
            CHECK(again[c].points[i].bits == curves[c].points[i].bits);
        }
    }
    CHECK(curves[0].points[0].ber > curves[0].points[2].ber);
    CHECK(to_csv(curves).find("golay,LXHX,HDR,-4,") != std::string::npos);

    cfg.snr_db.clear();
    CHECK_THROWS_AS(ber_sweep(tx, cfg), ConfigError);
}
