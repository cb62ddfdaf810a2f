#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wurook/commands.hpp"

using namespace wurook;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("wurook_test_cli_" + name);
    fs::remove_all(d);
    return d;
}

} // namespace

TEST_CASE("verify: defaults pass 14 patterns and search the 2 starred ones") {
    auto cfg = default_config();
    cfg.output_dir = scratch("verify");
    std::ostringstream con;
    const auto r = cmd_verify(cfg, con);
    CHECK(r.exit_code == kExitOk);
    REQUIRE(r.files.size() == 1);
    const auto j = nlohmann::json::parse(slurp(r.files[0]));
    int cs = 0, starred = 0, empty = 0;
    for (const auto& row : j["patterns"]) {
        if (row["kind"] == "cs") {
            ++cs;
            CHECK(row["certified"] == true);
            CHECK(row["papr_db"].get<double>() <= 3.02);
        } else if (row["kind"] == "empty") {
            ++empty;
        } else if (row["kind"] == "starred") {
            ++starred;
            CHECK(row.contains("theta1"));
            CHECK(row["papr_db"].get<double>() > 3.02);
        }
    }
    // 0000 carries nothing and passes vacuously.
    CHECK(cs + empty == 14);
    CHECK(empty == 1);
    CHECK(starred == 2);
    CHECK(j["violations"].empty());
}

TEST_CASE("verify: corrupted base pair, literal table, empty list") {
    auto cfg = default_config();
    cfg.output_dir = scratch("verify_bad");
    std::ostringstream con;
    cfg.golay.base.b = ComplexSeq::parse("+++");
    try {
        (void)cmd_verify(cfg, con);
        FAIL("expected InvariantError");
    } catch (const InvariantError& e) {
        CHECK(std::string(e.what()).find("lag") != std::string::npos);
    }

    cfg = default_config();
    cfg.output_dir = scratch("verify_literal");
    cfg.golay.table = TableVariant::kLiteral;
    CHECK(cmd_verify(cfg, con).exit_code == kExitInvariant);

    cfg.verify_patterns.clear();
    const auto r = cmd_verify(cfg, con);
    CHECK(r.exit_code == kExitOk);
    CHECK(r.files.empty());
}

TEST_CASE("generate: duration, sidecar, byte-identical reruns") {
    auto cfg = default_config();
    cfg.rates = "HHLL";
    cfg.payload.ldr_bits = 8;
    cfg.output_dir = scratch("generate");
    std::ostringstream con;
    const auto a = cmd_generate(cfg, con);
    REQUIRE(a.files.size() == 3);
    const auto iq1 = slurp(a.files[0]);
    const auto side = nlohmann::json::parse(slurp(a.files[1]));
    // 20 us legacy + 128 us LDR sync + 8 LDR bits * 16 us.
    CHECK(side["duration_us"].get<double>() == doctest::Approx(20.0 + 128.0 + 128.0));
    CHECK(iq1.size() == side["samples"].get<std::size_t>() * 8);
    CHECK(side["sample_rate_hz"].get<double>() == 320e6);
    CHECK(side["packets"][0]["segments"][0]["name"] == "legacy");
    CHECK(a.files[0].filename().string().find(cfg.fingerprint()) != std::string::npos);

    // Legacy placeholder is non-zero from the first sample.
    float iq[2];
    std::memcpy(iq, iq1.data(), 8);
    CHECK(std::hypot(iq[0], iq[1]) > 0.0f);

    const auto b = cmd_generate(cfg, con);
    CHECK(slurp(b.files[0]) == iq1);
    CHECK(slurp(b.files[1]) == slurp(a.files[1]));
    CHECK(slurp(b.files[2]) == slurp(a.files[2]));
}

TEST_CASE("generate: explicit payloads, all-inactive plan, unwritable path") {
    auto cfg = default_config();
    cfg.rates = "HXXX";
    cfg.payload_bits[0] = bits_from_string("1100101011110000");
    cfg.output_dir = scratch("generate_explicit");
    std::ostringstream con;
    auto r = cmd_generate(cfg, con);
    auto side = nlohmann::json::parse(slurp(r.files[1]));
    CHECK(side["packets"][0]["channels"][0]["payload"] == "1100101011110000");

    cfg.rates = "XXXX";
    cfg.payload_bits[0].reset();
    cfg.legacy.mode = LegacyStub::Mode::kSilence;
    r = cmd_generate(cfg, con);
    side = nlohmann::json::parse(slurp(r.files[1]));
    CHECK(side["packets"][0]["all_inactive"] == true);
    const auto raw = slurp(r.files[0]);
    CHECK(std::all_of(raw.begin(), raw.end(), [](char c) { return c == 0; }));

    cfg.output_dir = "/proc/wurook-cannot-exist";
    CHECK_THROWS_AS(cmd_generate(cfg, con), IoError);
}

TEST_CASE("papr, psd, ber: small runs emit JSON and CSV") {
    auto cfg = default_config();
    cfg.output_dir = scratch("experiments");
    cfg.rates = "HHHH";
    cfg.papr.n_packets = 100;
    cfg.psd.n_packets = 4;
    cfg.ber.snr_db = {0, 3, 6};
    cfg.ber.max_bits = 500;
    cfg.ber.min_errors = 10;
    cfg.ber.calibration_packets = 2;
    std::ostringstream con;

    auto r = cmd_papr(cfg, con);
    CHECK(r.files.size() == 2);
    CHECK(con.str().find("p99") != std::string::npos);

    r = cmd_psd(cfg, con);
    CHECK(r.files.size() == 2);
    CHECK(con.str().find("mask PASS") != std::string::npos);

    r = cmd_ber(cfg, con);
    REQUIRE(r.files.size() == 2);
    const auto csv = slurp(r.files[1]);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4); // header + 3 rows
    const auto again = cmd_ber(cfg, con);
    CHECK(slurp(again.files[0]) == slurp(r.files[0]));

    cfg.mask_file = "/nonexistent/mask.csv";
    CHECK_THROWS_AS(cmd_psd(cfg, con), IoError);
}
