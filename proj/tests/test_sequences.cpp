#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "wurook/sequences.hpp"

using namespace wurook;

namespace {

Coeffs lit(const char* s) { return parse_coeffs(s); }

// Independent PAPR oracle: evaluate sum_k c_k exp(j 2 pi k n / M) directly.
double direct_papr_db(const ChannelSequenceSet& set, const std::array<int, 4>& centers, std::size_t m) {
    std::vector<std::pair<int, cf64>> tones;
    for (std::size_t ch = 0; ch < 4; ++ch) {
        if (!set.per_channel[ch]) {
            continue;
        }
        const auto& s = *set.per_channel[ch];
        for (std::size_t j = 0; j < s.size(); ++j) {
            tones.emplace_back(centers[ch] - 3 + static_cast<int>(j), s[j].to_complex());
        }
    }
    double peak = 0.0;
    double mean = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
        cf64 acc{};
        for (auto [bin, c] : tones) {
            const double ph = 2.0 * std::numbers::pi * bin * static_cast<double>(n) / static_cast<double>(m);
            acc += c * cf64(std::cos(ph), std::sin(ph));
        }
        peak = std::max(peak, std::norm(acc));
        mean += std::norm(acc);
    }
    mean /= static_cast<double>(m);
    return 10.0 * std::log10(peak / mean);
}

// Literal transcription of the published multi-channel table.
const std::map<std::string, std::array<const char*, 4>> kPublishedTable = {
    {"0000", {"", "", "", ""}},
    {"1000", {"+i+0++-", "", "", ""}},
    {"0100", {"", "+i+0++-", "", ""}},
    {"1100", {"+i+0++-", "+i+0--+", "", ""}},
    {"0010", {"", "", "+i+0--+", ""}},
    {"1010", {"+i+0++-", "", "+i+0--+", ""}},
    {"0110", {"", "+i+0++-", "+i+0--+", ""}},
    {"1110", {"+i+0++-", "i-i0++-", "+i+0--+", ""}},
    {"0001", {"", "", "", "+i+0++-"}},
    {"1001", {"+i+0++-", "", "", "+i+0--+"}},
    {"0101", {"", "+i+0++-", "", "+i+0--+"}},
    {"1101", {"+i+0++-", "i-i0++-", "", "+i+0--+"}},
    {"0011", {"", "", "+i+0++-", "+i+0--+"}},
    {"1011", {"+i+0++-", "", "j+j0--+", "+i+0--+"}},
    {"0111", {"", "+i+0++-", "i-i0++-", "+i+0--+"}},
    {"1111", {"+i+0++-", "+i+0--+", "-j-0--+", "-j-0++-"}},
};

} // namespace

TEST_CASE("sequence literals round-trip through the text alphabet") {
    const auto s = ComplexSeq::parse("+i+0++-j");
    CHECK(s.size() == 8);
    CHECK(s[1] == kI);
    CHECK(s[7] == kMinusI);
    CHECK(s.str() == "+i+0++-j");
    CHECK_THROWS_AS(ComplexSeq::parse("+x"), ConfigError);
    CHECK_THROWS_AS(ComplexSeq::parse(""), InvariantError);
    CHECK_THROWS_AS(ComplexSeq(Coeffs{Gint{2, 0}}), InvariantError);
}

TEST_CASE("apac") {
    const Coeffs a = lit("+i+");
    const Coeffs b = lit("++-");
    CHECK(apac(a, 0) == Gint{3, 0});
    CHECK(apac(a, 2) == Gint{1, 0});
    CHECK(apac(b, 2) == Gint{-1, 0});
    CHECK_THROWS_AS(apac(a, 3), std::out_of_range);
    CHECK_THROWS_AS(apac(a, -3), std::out_of_range);
}

TEST_CASE("is_gcp") {
    CHECK(is_gcp(lit("+i+"), lit("++-")));
    CHECK_FALSE(is_gcp(lit("++"), lit("++")));
    CHECK(first_failing_lag(lit("++"), lit("++")) == 1);
    CHECK(is_gcp(lit("+"), lit("-")));
    CHECK_THROWS_AS(is_gcp(lit("++"), lit("+")), std::invalid_argument);
}

TEST_CASE("golay_construct reproduces the single-channel pair") {
    const TheoremParams p{kOne, kOne, 1, 1, 4};
    const auto pair = golay_construct(lit("+i+"), lit("++-"), lit("+"), lit("+"), p, Eligibility::kWaveform);
    CHECK(format_coeffs(pair.a()) == "+i+0++-");
    CHECK(format_coeffs(pair.b()) == "+i+0--+");
}

TEST_CASE("golay_construct hand-expanded length-1 seeds") {
    const auto pair = golay_construct(lit("+"), lit("+"), lit("+"), lit("+"), {kOne, kOne, 1, 1, 2});
    CHECK(format_coeffs(pair.a()) == "+0+");
    CHECK(format_coeffs(pair.b()) == "+0-");
}

TEST_CASE("golay_construct re-uses f1/g1 across a channel gap") {
    const GolayPair f1g1(lit("+i+0++-"), lit("+i+0--+"));
    const GolayPair one(lit("+"), lit("+"));
    const auto pair = golay_construct(f1g1, one, {kOne, kOne, 1, 1, 32});
    const std::string gap(25, '0');
    CHECK(format_coeffs(pair.a()) == "+i+0++-" + gap + "+i+0--+");
    CHECK(format_coeffs(pair.b()) == "+i+0++-" + gap + "-j-0++-");
}

TEST_CASE("golay_construct rejects non-complementary inputs") {
    CHECK_THROWS_AS(golay_construct(lit("++"), lit("++"), lit("+"), lit("+"), {}), std::invalid_argument);
    CHECK_THROWS_AS(GolayPair(lit("++"), lit("++")), InvariantError);
}

TEST_CASE("golay_construct flags overlap when a waveform sequence is requested") {
    // m = 0 overlaps A(z) C(z) and B(z) D(z) -> element 2 appears.
    CHECK_NOTHROW(golay_construct(lit("+"), lit("+"), lit("+"), lit("+"), {kOne, kOne, 1, 1, 0}));
    CHECK_THROWS_AS(
        golay_construct(lit("+"), lit("+"), lit("+"), lit("+"), {kOne, kOne, 1, 1, 0}, Eligibility::kWaveform),
        InvariantError);
}

TEST_CASE("quaternary GCP catalog") {
    // Binary pairs are a subset; length 7 has no quaternary pair.
    CHECK(enumerate_quaternary_gcps(7).empty());
    for (std::size_t len : {1u, 2u, 3u, 4u, 5u, 6u, 8u}) {
        const auto cat = enumerate_quaternary_gcps(len);
        CHECK_MESSAGE(!cat.empty(), "length ", len);
        for (std::size_t i = 0; i < cat.size(); i += 1 + cat.size() / 50) {
            CHECK(is_gcp(cat[i].first, cat[i].second));
        }
    }
    const auto three = enumerate_quaternary_gcps(3);
    bool found = false;
    for (const auto& [a, b] : three) {
        found |= (format_coeffs(a) == "+i+" && format_coeffs(b) == "++-") ||
                 (format_coeffs(b) == "+i+" && format_coeffs(a) == "++-");
    }
    CHECK(found);
}

TEST_CASE("property: construction is closed over the catalog") {
    std::mt19937_64 rng(7);
    std::vector<std::vector<std::pair<Coeffs, Coeffs>>> catalog;
    for (std::size_t len = 1; len <= 8; ++len) {
        if (len != 7) {
            catalog.push_back(enumerate_quaternary_gcps(len));
        }
    }
    for (int trial = 0; trial < 400; ++trial) {
        const auto& c1 = catalog[rng() % catalog.size()];
        const auto& c2 = catalog[rng() % catalog.size()];
        const auto& ab = c1[rng() % c1.size()];
        const auto& cd = c2[rng() % c2.size()];
        TheoremParams p;
        p.theta1 = kQpskUnits[rng() % 4];
        p.theta2 = kQpskUnits[rng() % 4];
        p.k = 1 + rng() % 10;
        p.l = 1 + rng() % 4;
        p.m = rng() % 40;
        const auto out = golay_construct(GolayPair(ab.first, ab.second), GolayPair(cd.first, cd.second), p);
        REQUIRE(is_gcp(out.a(), out.b()));
    }
}

TEST_CASE("property: reverse-conjugate involution and APAC symmetry") {
    std::mt19937_64 rng(11);
    const std::array<Gint, 5> alphabet{kOne, kMinusOne, kI, kMinusI, Gint{}};
    for (int trial = 0; trial < 300; ++trial) {
        Coeffs s(1 + rng() % 12);
        for (auto& g : s) {
            g = alphabet[rng() % 5];
        }
        CHECK(reverse_conjugate(reverse_conjugate(s)) == s);
        for (long long k = 0; k < static_cast<long long>(s.size()); ++k) {
            CHECK(apac(s, -k) == apac(s, k).conj());
        }
    }
}

TEST_CASE("table1_select matches the published table except the corrected all-active row") {
    for (const auto& [bits, row] : kPublishedTable) {
        const auto literal = table1_select(pattern_from_string(bits), {}, TableVariant::kLiteral);
        for (std::size_t ch = 0; ch < 4; ++ch) {
            const std::string want = row[ch];
            INFO("pattern ", bits, " channel ", ch + 1);
            if (want.empty()) {
                CHECK_FALSE(literal.active(ch));
            } else {
                REQUIRE(literal.active(ch));
                CHECK(literal.per_channel[ch]->str() == want);
            }
        }
        CHECK(literal.is_cs == !(bits == "1101" || bits == "1011"));
    }
    const auto corrected = table1_select(pattern_from_string("1111"));
    CHECK(corrected.per_channel[0]->str() == "+i+0++-");
    CHECK(corrected.per_channel[1]->str() == "+i+0--+");
    CHECK(corrected.per_channel[2]->str() == "-j-0--+");
    CHECK(corrected.per_channel[3]->str() == "+i+0--+");
    CHECK(table1_select(pattern_from_string("0000")).active_count() == 0);
}

TEST_CASE("table rows: every entry has a zero DC element and unimodular tones") {
    for (int idx = 0; idx < 16; ++idx) {
        const auto set = table1_select(pattern_from_index(idx));
        for (const auto& s : set.per_channel) {
            if (s) {
                CHECK(s->size() == 7);
                CHECK((*s)[3].is_zero());
                CHECK(s->energy() == 6);
            }
        }
    }
}

TEST_CASE("non-starred rows are certified complementary and stay under the 3 dB bound") {
    const AllocationGeometry geom; // 16x oversampling of the 128-bin grid
    for (int idx = 1; idx < 16; ++idx) {
        const auto pat = pattern_from_index(idx);
        const auto set = table1_select(pat);
        const auto cert = certify_composite(set, geom.center_bins);
        INFO("pattern ", pattern_to_string(pat));
        if (is_starred(pat)) {
            CHECK_FALSE(cert.has_value());
            continue;
        }
        REQUIRE(cert.has_value());
        CHECK(symbol_papr_db(set, geom) <= 3.02);
    }
    // The printed all-active row is not complementary.
    CHECK_FALSE(certify_composite(table1_select(pattern_from_string("1111"), {}, TableVariant::kLiteral),
                                  AllocationGeometry{}.center_bins)
                    .has_value());
}

TEST_CASE("qpsk_phase_search") {
    const AllocationGeometry geom;
    SUBCASE("1011 dominates the published assignment") {
        const auto pat = pattern_from_string("1011");
        const auto res = qpsk_phase_search(pat, geom);
        const double published = symbol_papr_db(table1_select(pat), geom);
        CHECK(res.papr_db <= published + 1e-12);
        CHECK_FALSE(res.set.is_cs);
    }
    SUBCASE("1101 dominates the identity phases") {
        const auto res = qpsk_phase_search(pattern_from_string("1101"), geom);
        CHECK(res.papr_db <= res.candidate_papr_db[0]);
    }
    SUBCASE("every candidate agrees with a direct time-domain evaluation") {
        for (const char* bits : {"1101", "1011"}) {
            const auto pat = pattern_from_string(bits);
            const auto res = qpsk_phase_search(pat, geom);
            const auto row = table1_select(pat);
            for (std::size_t i1 = 0; i1 < 4; ++i1) {
                for (std::size_t i2 = 0; i2 < 4; ++i2) {
                    auto cand = row;
                    cand.per_channel[starred_channel(pat)] =
                        join_with_dc(ComplexSeq::parse("+i+"), ComplexSeq::parse("++-"), kQpskUnits[i1],
                                     -kQpskUnits[i2]);
                    const double oracle = direct_papr_db(cand, geom.center_bins, geom.fft_size);
                    CHECK(std::abs(oracle - res.candidate_papr_db[4 * i1 + i2]) < 1e-9);
                }
            }
            double mn = 1e9;
            for (double v : res.candidate_papr_db) {
                mn = std::min(mn, v);
            }
            CHECK(res.papr_db == mn);
        }
    }
    CHECK_THROWS_AS(qpsk_phase_search(pattern_from_string("1111")), std::invalid_argument);
}

TEST_CASE("embed_on_grid rejects overlapping footprints") {
    const auto set = table1_select(pattern_from_string("1100"));
    CHECK_THROWS_AS(embed_on_grid(set, {-48, -44, 16, 48}, 512), ConfigError);
    CHECK_THROWS_AS(embed_on_grid(set, {-255, -16, 16, 48}, 512), ConfigError);
    const auto grid = embed_on_grid(set, {-48, -16, 16, 48}, 512);
    double e = 0;
    for (auto v : grid) {
        e += std::norm(v);
    }
    CHECK(e == doctest::Approx(12.0));
}
