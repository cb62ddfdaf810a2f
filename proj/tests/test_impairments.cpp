#include <doctest.h>

#include <cmath>
#include <random>

#include "wurook/impairments.hpp"

using namespace wurook;

namespace {

IqSignal random_signal(std::size_t n, std::uint64_t seed, double zero_fraction = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u;
    IqSignal s;
    s.sample_rate = 320e6;
    for (std::size_t i = 0; i < n; ++i) {
        s.samples.push_back(u(rng) < zero_fraction ? cf64{} : cf64(nd(rng), nd(rng)));
    }
    return s;
}

double mean_on_power(const IqSignal& s) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& v : s.samples) {
        if (std::abs(v) > 0.0) {
            acc += std::norm(v);
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

} // namespace

TEST_CASE("rapp: limits") {
    RappPa pa;
    CHECK(pa.am_am(1e-3) == doctest::Approx(1e-3).epsilon(0.01));
    CHECK(pa.am_am(1e6) == doctest::Approx(1.0).epsilon(1e-6));
    double prev = 0.0;
    for (double a = 0.01; a < 10.0; a += 0.01) {
        const double y = pa.am_am(a);
        CHECK(y > prev);
        prev = y;
    }
    RappPa clip;
    clip.p = 100;
    for (double a : {0.1, 0.5, 0.9, 1.1, 2.0, 10.0}) {
        CHECK(std::abs(clip.am_am(a) - std::min(a, 1.0)) <= 0.01 * std::min(a, 1.0));
    }
}

TEST_CASE("rapp: constant-envelope OBO calibration is exact") {
    IqSignal s;
    s.sample_rate = 1.0;
    for (int i = 0; i < 1000; ++i) {
        s.samples.push_back(0.37 * std::polar(1.0, 0.01 * i));
    }
    for (double obo : {1.0, 5.0, 8.0}) {
        RappPa pa;
        pa.obo_db = obo;
        const auto y = rapp_apply(s, pa);
        const double obo_meas = 10.0 * std::log10(pa.sat_amplitude * pa.sat_amplitude / y.mean_power());
        CHECK(std::abs(obo_meas - obo) < 1e-9);
    }
}

TEST_CASE("rapp: OBO over ON samples for a gated signal") {
    const auto s = random_signal(20000, 7, 0.5);
    RappPa pa;
    const auto y = rapp_apply(s, pa);
    CHECK(10.0 * std::log10(1.0 / mean_on_power(y)) == doctest::Approx(5.0).epsilon(1e-9));
    // Phase preserved, zeros stay zero.
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::abs(s.samples[i]) == 0.0) {
            CHECK(std::abs(y.samples[i]) == 0.0);
        } else {
            CHECK(std::abs(std::arg(y.samples[i] / s.samples[i])) < 1e-12);
        }
    }
    // Input scaling does not change the output (drive is recalibrated).
    IqSignal s2 = s;
    for (auto& v : s2.samples) {
        v *= 3.0;
    }
    const auto y2 = rapp_apply(s2, pa);
    CHECK(std::abs(y2.samples[5] - y.samples[5]) < 1e-9);
}

TEST_CASE("rapp: errors and bypass") {
    IqSignal zero(std::vector<cf64>(10), 1.0);
    CHECK_THROWS_AS(rapp_apply(zero, RappPa{}), ConfigError);
    RappPa off;
    off.obo_db = kNoNoise;
    CHECK(rapp_apply(zero, off).samples == zero.samples);
    RappPa bad;
    bad.p = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("awgn: variance, determinism, identity") {
    IqSignal z(std::vector<cf64>(1000000), 1.0);
    const auto y = awgn_apply(z, 10.0, 2.0, 99);
    CHECK(y.mean_power() == doctest::Approx(0.2).epsilon(0.01));
    const auto y2 = awgn_apply(z, 10.0, 2.0, 99);
    CHECK(y.samples == y2.samples);
    const auto s = random_signal(100, 1);
    CHECK(awgn_apply(s, kNoNoise, 1.0, 5).samples == s.samples);
}

TEST_CASE("fading: single tap and two-tap oracle") {
    const auto s = random_signal(500, 3);
    FadingProfile one;
    one.taps = {{0.0, 1.0}};
    one.rng_seed = 4;
    const auto h1 = draw_fading(one, s.sample_rate);
    const auto y1 = fading_apply(s, one);
    REQUIRE(y1.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(std::abs(y1.samples[i] - h1.gains[0] * s.samples[i]) < 1e-12);
    }

    FadingProfile two;
    two.taps = {{0.0, 0.5}, {1.0 / s.sample_rate, 0.5}};
    two.rng_seed = 11;
    const auto h = draw_fading(two, s.sample_rate);
    REQUIRE(h.delay_samples == std::vector<std::size_t>{0, 1});
    const auto y = fading_apply(s, two);
    REQUIRE(y.size() == s.size() + 1);
    for (std::size_t n = 0; n < y.size(); ++n) {
        cf64 ref = (n < s.size() ? h.gains[0] * s.samples[n] : cf64{}) +
                   (n >= 1 ? h.gains[1] * s.samples[n - 1] : cf64{});
        CHECK(std::abs(y.samples[n] - ref) < 1e-12);
    }

    // Linearity in the input for a fixed seed.
    IqSignal s3 = s;
    for (auto& v : s3.samples) {
        v *= cf64(0.5, -2.0);
    }
    const auto y3 = fading_apply(s3, two);
    CHECK(std::abs(y3.samples[10] - cf64(0.5, -2.0) * y.samples[10]) < 1e-12);
}

TEST_CASE("fading: mean energy over realizations, shipped profile") {
    auto prof = load_fading_profile(WUROOK_DATA_DIR "/hiperlan2_a.csv");
    CHECK(prof.taps.size() == 18);
    double total = 0.0;
    for (const auto& t : prof.taps) {
        total += t.power;
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(prof.taps.back().delay_s == doctest::Approx(390e-9));

    const auto s = random_signal(256, 8);
    const double e_in = s.mean_power() * static_cast<double>(s.size());
    double e_out = 0.0;
    const int trials = 10000;
    for (int k = 0; k < trials; ++k) {
        prof.rng_seed = static_cast<std::uint64_t>(k) + 1000;
        const auto y = fading_apply(s, prof);
        e_out += y.mean_power() * static_cast<double>(y.size());
    }
    CHECK(e_out / trials == doctest::Approx(e_in).epsilon(0.02));

    CHECK_THROWS_AS(parse_fading_profile("# nothing\n"), ConfigError);
    CHECK_THROWS_AS(parse_fading_profile("10,0\n5,0\n"), ConfigError);
    CHECK_THROWS_AS(load_fading_profile("/nonexistent.csv"), IoError);
}
