#include "wurook/config.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wurook/seed.hpp"

namespace wurook {

using nlohmann::json;

namespace {

/// Object reader that records which keys were consumed and rejects the rest.
class Reader {
  public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(where() + " must be an object");
        }
    }
    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    /// Throws on any key that was never requested.
    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) {
                throw ConfigError("unknown key '" + sub(k) + "'");
            }
        }
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) {
            return nullptr;
        }
        return &*it;
    }

    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

    template <class T>
    void read(const std::string& key, T& out) {
        if (const json* v = get(key)) {
            out = convert<T>(*v, sub(key));
        }
    }

    template <class T>
    void read_opt(const std::string& key, std::optional<T>& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) {
            return;
        }
        if (it->is_null()) {
            out.reset();
        } else {
            out = convert<T>(*it, sub(key));
        }
    }

    template <class T>
    static T convert(const json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) {
                throw ConfigError("'" + path + "' must be a boolean");
            }
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned()) {
                throw ConfigError("'" + path + "' must be a non-negative integer");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                throw ConfigError("'" + path + "' must be an integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ConfigError("'" + path + "' must be a number");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                throw ConfigError("'" + path + "' must be a string");
            }
        }
        return v.get<T>();
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

double finite_number(const json& v, const std::string& path) {
    const double d = Reader::convert<double>(v, path);
    if (!std::isfinite(d)) {
        throw ConfigError("'" + path + "' must be finite");
    }
    return d;
}

void read_waveform(Reader& r, WaveformParams& w) {
    r.read("idft_size", w.idft_size);
    r.read("cp_len", w.cp_len);
    r.read("base_rate_hz", w.base_rate);
    r.read("oversample", w.oversample);
    if (const json* v = r.get("channel_center_bins")) {
        if (!v->is_array() || v->size() != 4) {
            throw ConfigError("'" + r.sub("channel_center_bins") + "' must be an array of 4 integers");
        }
        for (std::size_t i = 0; i < 4; ++i) {
            w.channel_center_bins[i] = Reader::convert<int>((*v)[i], r.sub("channel_center_bins"));
        }
    }
    if (const json* v = r.get("legacy_duration_us")) {
        w.legacy_duration = finite_number(*v, r.sub("legacy_duration_us")) / 1e6;
    }
}

LfsrState lfsr_from_polynomial(const std::vector<unsigned>& exponents, std::uint32_t seed) {
    if (exponents.empty()) {
        throw ConfigError("'lfsr.polynomial' must list at least one exponent");
    }
    LfsrState s;
    s.width = 0;
    s.taps = 0;
    for (unsigned e : exponents) {
        if (e < 1 || e > 31) {
            throw ConfigError("'lfsr.polynomial' exponents must lie in 1..31");
        }
        s.width = std::max(s.width, e);
        s.taps |= 1u << (e - 1);
    }
    s.reg = seed;
    if (seed == 0 || seed >= (1u << s.width)) {
        throw ConfigError("'lfsr.seed' must be non-zero and fit the register width");
    }
    return s;
}

std::vector<unsigned> polynomial_of(const LfsrState& s) {
    std::vector<unsigned> e;
    for (unsigned b = s.width; b >= 1; --b) {
        if (s.taps & (1u << (b - 1))) {
            e.push_back(b);
        }
    }
    return e;
}

std::vector<cf64> read_f32_iq(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open legacy IQ file " + path.string());
    }
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() % 8 != 0) {
        throw ConfigError("legacy IQ file " + path.string() + " is not whole float32 I/Q pairs");
    }
    std::vector<cf64> out(raw.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        float iq[2];
        std::memcpy(iq, raw.data() + 8 * i, 8);
        out[i] = cf64(iq[0], iq[1]);
    }
    return out;
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return "missing:" + path.filename().string();
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return wurook::fingerprint(ss.str());
}

std::string method_name(MethodKind m) { return m == MethodKind::kGolay ? "golay" : "baseline"; }

json gamma_json(const std::array<cf64, 4>& g) {
    json a = json::array();
    for (const auto& v : g) {
        a.push_back({v.real(), v.imag()});
    }
    return a;
}

} // namespace

std::filesystem::path default_data_dir() {
#ifdef WUROOK_DATA_DIR
    return WUROOK_DATA_DIR;
#else
    return "data";
#endif
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.fading_profile = default_data_dir() / "hiperlan2_a.csv";
    c.mask_file = default_data_dir() / "sem_80mhz.csv";
    for (int i = 0; i < 16; ++i) {
        c.verify_patterns.push_back(pattern_to_string(pattern_from_index(i)));
    }
    c.papr.rates = c.rates;
    return c;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c = default_config();
    Reader root(doc, "");

    std::string method = method_name(c.method);
    root.read("method", method);
    if (method == "golay") {
        c.method = MethodKind::kGolay;
    } else if (method == "baseline") {
        c.method = MethodKind::kBaseline;
    } else {
        throw ConfigError("'method' must be \"golay\" or \"baseline\"");
    }
    root.read("seed", c.seed);
    root.read("threads", c.threads);
    std::string out = c.output_dir.string();
    root.read("output_dir", out);
    c.output_dir = resolve(base_dir, out);

    if (const json* v = root.get("waveform")) {
        Reader r(*v, "waveform");
        read_waveform(r, c.waveform);
        r.finish();
    }
    if (const json* v = root.get("golay")) {
        Reader r(*v, "golay");
        std::string a = c.golay.base.a.str(), b = c.golay.base.b.str();
        r.read("base_a", a);
        r.read("base_b", b);
        c.golay.base.a = wrap("golay.base_a", [&] { return ComplexSeq::parse(a); });
        c.golay.base.b = wrap("golay.base_b", [&] { return ComplexSeq::parse(b); });
        std::string starred = "searched", table = "corrected";
        r.read("starred_phases", starred);
        r.read("table", table);
        if (starred == "searched") {
            c.golay.starred = StarredPhases::kSearched;
        } else if (starred == "published") {
            c.golay.starred = StarredPhases::kPublished;
        } else {
            throw ConfigError("'golay.starred_phases' must be \"searched\" or \"published\"");
        }
        if (table == "corrected") {
            c.golay.table = TableVariant::kCorrected;
        } else if (table == "literal") {
            c.golay.table = TableVariant::kLiteral;
        } else {
            throw ConfigError("'golay.table' must be \"corrected\" or \"literal\"");
        }
        r.finish();
    }
    if (const json* v = root.get("baseline")) {
        Reader r(*v, "baseline");
        int example = c.baseline.example_id;
        r.read("example", example);
        c.baseline = wrap("baseline.example", [&] { return default_baseline(example); });
        std::optional<std::string> hdr, ldr;
        r.read_opt("hdr", hdr);
        r.read_opt("ldr", ldr);
        if (hdr) {
            c.baseline.hdr = wrap("baseline.hdr", [&] { return ComplexSeq::parse(*hdr); });
        }
        if (ldr) {
            c.baseline.ldr = wrap("baseline.ldr", [&] { return ComplexSeq::parse(*ldr); });
        }
        if (const json* g = r.get("gamma")) {
            if (!g->is_array() || g->size() != 4) {
                throw ConfigError("'baseline.gamma' must be 4 [re, im] pairs");
            }
            for (std::size_t i = 0; i < 4; ++i) {
                const json& e = (*g)[i];
                if (!e.is_array() || e.size() != 2) {
                    throw ConfigError("'baseline.gamma' must be 4 [re, im] pairs");
                }
                c.baseline.gamma[i] = cf64(finite_number(e[0], "baseline.gamma"), finite_number(e[1], "baseline.gamma"));
            }
        }
        r.finish();
    }
    if (const json* v = root.get("plan")) {
        Reader r(*v, "plan");
        r.read("rates", c.rates);
        r.read("ldr_bits", c.payload.ldr_bits);
        r.read_opt("hdr_bits", c.payload.hdr_bits);
        if (const json* p = r.get("payloads")) {
            if (!p->is_array() || p->size() != 4) {
                throw ConfigError("'plan.payloads' must be an array of 4 bit strings or nulls");
            }
            for (std::size_t i = 0; i < 4; ++i) {
                if ((*p)[i].is_null()) {
                    c.payload_bits[i].reset();
                    continue;
                }
                const auto s = Reader::convert<std::string>((*p)[i], "plan.payloads");
                c.payload_bits[i] = wrap("plan.payloads", [&] { return bits_from_string(s); });
            }
        }
        std::string second = "repeat";
        r.read("ldr_second", second);
        if (second == "repeat") {
            c.ldr_second = LdrSecondSymbol::kRepeat;
        } else if (second == "independent") {
            c.ldr_second = LdrSecondSymbol::kIndependent;
        } else {
            throw ConfigError("'plan.ldr_second' must be \"repeat\" or \"independent\"");
        }
        r.finish();
    }
    if (const json* v = root.get("sync")) {
        const auto s = Reader::convert<std::string>(*v, "sync");
        c.sync = wrap("sync", [&] { return bits_from_string(s); });
        if (c.sync.empty()) {
            throw ConfigError("'sync' must not be empty");
        }
    }
    if (const json* v = root.get("lfsr")) {
        Reader r(*v, "lfsr");
        auto poly = polynomial_of(c.lfsr);
        std::uint32_t seed = c.lfsr.reg;
        r.read("polynomial", poly);
        r.read("seed", seed);
        c.lfsr = lfsr_from_polynomial(poly, seed);
        wrap("lfsr", [&] {
            c.lfsr.validate();
            return 0;
        });
        r.finish();
    }
    if (const json* v = root.get("legacy")) {
        Reader r(*v, "legacy");
        std::string mode = "placeholder";
        r.read("mode", mode);
        std::optional<std::string> file;
        r.read_opt("file", file);
        if (mode == "placeholder") {
            c.legacy.mode = LegacyStub::Mode::kPlaceholder;
        } else if (mode == "silence") {
            c.legacy.mode = LegacyStub::Mode::kSilence;
        } else if (mode == "samples") {
            if (!file) {
                throw ConfigError("'legacy.file' is required with mode \"samples\"");
            }
            c.legacy.mode = LegacyStub::Mode::kSamples;
            c.legacy.samples = read_f32_iq(resolve(base_dir, *file));
        } else {
            throw ConfigError("'legacy.mode' must be \"placeholder\", \"silence\" or \"samples\"");
        }
        if (file && mode != "samples") {
            throw ConfigError("'legacy.file' is only valid with mode \"samples\"");
        }
        r.finish();
    }
    if (const json* v = root.get("pa")) {
        Reader r(*v, "pa");
        bool enabled = true;
        r.read("enabled", enabled);
        RappPa pa;
        r.read("p", pa.p);
        r.read("sat_amplitude", pa.sat_amplitude);
        r.read("obo_db", pa.obo_db);
        std::string avg = "on_samples";
        r.read("average", avg);
        if (avg == "on_samples") {
            pa.on_samples_only = true;
        } else if (avg == "all_samples") {
            pa.on_samples_only = false;
        } else {
            throw ConfigError("'pa.average' must be \"on_samples\" or \"all_samples\"");
        }
        wrap("pa", [&] {
            pa.validate();
            return 0;
        });
        if (enabled) {
            c.pa = pa;
        } else {
            c.pa.reset();
        }
        r.finish();
    }
    if (const json* v = root.get("channel")) {
        Reader r(*v, "channel");
        std::string model = "awgn";
        r.read("model", model);
        if (model == "awgn") {
            c.channel = ChannelKind::kAwgn;
        } else if (model == "fading") {
            c.channel = ChannelKind::kFading;
        } else {
            throw ConfigError("'channel.model' must be \"awgn\" or \"fading\"");
        }
        std::optional<std::string> profile;
        r.read_opt("profile", profile);
        if (profile) {
            c.fading_profile = resolve(base_dir, *profile);
        }
        r.finish();
    }
    if (const json* v = root.get("receiver")) {
        Reader r(*v, "receiver");
        r.read("filter_order", c.receiver.filter_order);
        r.read("cutoff_hz", c.receiver.cutoff_hz);
        r.read_opt("offset_samples", c.receiver.offset_samples);
        r.read("decimation", c.receiver.decimation);
        r.finish();
    }
    if (const json* v = root.get("verify")) {
        Reader r(*v, "verify");
        if (const json* p = r.get("patterns")) {
            c.verify_patterns = Reader::convert<std::vector<std::string>>(*p, "verify.patterns");
            for (const auto& s : c.verify_patterns) {
                wrap("verify.patterns", [&] { return pattern_from_string(s); });
            }
        }
        r.finish();
    }
    if (const json* v = root.get("generate")) {
        Reader r(*v, "generate");
        r.read("packets", c.generate.packets);
        r.read("csv", c.generate.write_csv);
        r.read("csv_auto_limit", c.generate.csv_auto_limit);
        r.finish();
    }
    if (const json* v = root.get("papr")) {
        Reader r(*v, "papr");
        r.read("packets", c.papr.n_packets);
        r.read("window_us", c.papr.window_us);
        r.read("align_offset_slots", c.papr.align_offset_slots);
        r.finish();
    }
    if (const json* v = root.get("psd")) {
        Reader r(*v, "psd");
        r.read("packets", c.psd.n_packets);
        r.read("segment_len", c.psd.segment_len);
        r.read("overlap", c.psd.overlap);
        std::optional<std::string> mask;
        r.read_opt("mask", mask);
        if (mask) {
            c.mask_file = resolve(base_dir, *mask);
        }
        r.finish();
    }
    if (const json* v = root.get("ber")) {
        Reader r(*v, "ber");
        if (const json* s = r.get("snr_db")) {
            if (!s->is_array()) {
                throw ConfigError("'ber.snr_db' must be an array of numbers");
            }
            c.ber.snr_db.clear();
            for (const auto& e : *s) {
                // "inf" selects a noise-free point.
                if (e.is_string() && e.get<std::string>() == "inf") {
                    c.ber.snr_db.push_back(kNoNoise);
                } else {
                    c.ber.snr_db.push_back(finite_number(e, "ber.snr_db"));
                }
            }
        }
        r.read("min_errors", c.ber.min_errors);
        r.read("max_bits", c.ber.max_bits);
        r.read("batch_packets", c.ber.batch_packets);
        r.read("warmup_slots", c.ber.warmup_slots);
        r.read("calibration_packets", c.ber.calibration_packets);
        r.finish();
    }

    root.finish();

    // Cross-field checks that do not need the data files.
    wrap("waveform", [&] {
        c.waveform.validate();
        return 0;
    });
    wrap("plan.rates", [&] { return ChannelPlan::from_rates(c.rates); });
    if (c.threads > 1024) {
        throw ConfigError("'threads' must be at most 1024");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) {
        base = ".";
    }
    return parse_config(ss.str(), base);
}

std::string ExperimentConfig::canonical() const {
    json j;
    j["method"] = method_name(method);
    j["golay"] = {{"base_a", golay.base.a.str()},
                  {"base_b", golay.base.b.str()},
                  {"starred", golay.starred == StarredPhases::kSearched ? "searched" : "published"},
                  {"table", golay.table == TableVariant::kCorrected ? "corrected" : "literal"}};
    j["baseline"] = {{"example", baseline.example_id},
                     {"hdr", baseline.hdr.str()},
                     {"ldr", baseline.ldr.str()},
                     {"gamma", gamma_json(baseline.gamma)}};
    j["waveform"] = {{"idft_size", waveform.idft_size},
                     {"cp_len", waveform.cp_len},
                     {"base_rate_hz", waveform.base_rate},
                     {"oversample", waveform.oversample},
                     {"channel_center_bins", waveform.channel_center_bins},
                     {"legacy_duration_s", waveform.legacy_duration}};
    json payloads = json::array();
    for (const auto& p : payload_bits) {
        payloads.push_back(p ? json(bits_to_string(*p)) : json(nullptr));
    }
    j["plan"] = {{"rates", rates},
                 {"ldr_bits", payload.ldr_bits},
                 {"hdr_bits", payload.hdr_bits ? json(*payload.hdr_bits) : json(nullptr)},
                 {"payloads", payloads},
                 {"ldr_second", ldr_second == LdrSecondSymbol::kRepeat ? "repeat" : "independent"}};
    j["sync"] = bits_to_string(sync);
    j["lfsr"] = {{"reg", lfsr.reg}, {"taps", lfsr.taps}, {"width", lfsr.width}};
    const char* legacy_mode = legacy.mode == LegacyStub::Mode::kPlaceholder ? "placeholder"
                              : legacy.mode == LegacyStub::Mode::kSilence   ? "silence"
                                                                            : "samples";
    j["legacy"] = {{"mode", legacy_mode}};
    if (legacy.mode == LegacyStub::Mode::kSamples) {
        std::string raw;
        raw.reserve(legacy.samples.size() * 16);
        for (const auto& s : legacy.samples) {
            raw.append(reinterpret_cast<const char*>(&s), sizeof(s));
        }
        j["legacy"]["hash"] = wurook::fingerprint(raw);
    }
    j["seed"] = seed;
    if (pa) {
        j["pa"] = {{"p", pa->p}, {"sat", pa->sat_amplitude}, {"obo_db", pa->obo_db}, {"on_only", pa->on_samples_only}};
    } else {
        j["pa"] = nullptr;
    }
    j["channel"] = channel == ChannelKind::kAwgn ? "awgn" : "fading";
    j["fading_profile"] = channel == ChannelKind::kFading ? json(file_hash(fading_profile)) : json(nullptr);
    j["receiver"] = {{"order", receiver.filter_order},
                     {"cutoff_hz", receiver.cutoff_hz},
                     {"offset", receiver.offset_samples ? json(*receiver.offset_samples) : json(nullptr)},
                     {"decimation", receiver.decimation}};
    j["verify"] = verify_patterns;
    j["generate"] = {{"packets", generate.packets}, {"csv", generate.write_csv}, {"csv_auto_limit", generate.csv_auto_limit}};
    j["papr"] = {{"packets", papr.n_packets}, {"window_us", papr.window_us}, {"align", papr.align_offset_slots}};
    j["psd"] = {{"packets", psd.n_packets},
                {"segment_len", psd.segment_len},
                {"overlap", psd.overlap},
                {"mask", file_hash(mask_file)}};
    json snr = json::array();
    for (double s : ber.snr_db) {
        snr.push_back(std::isinf(s) ? json("inf") : json(s));
    }
    j["ber"] = {{"snr_db", snr},
                {"min_errors", ber.min_errors},
                {"max_bits", ber.max_bits},
                {"batch_packets", ber.batch_packets},
                {"warmup_slots", ber.warmup_slots},
                {"calibration_packets", ber.calibration_packets}};
    return j.dump();
}

std::string ExperimentConfig::fingerprint() const { return wurook::fingerprint(canonical()); }

Transmitter make_transmitter(const ExperimentConfig& cfg) {
    if (cfg.method == MethodKind::kGolay) {
        return Transmitter{GolayTransmitter(cfg.waveform, cfg.golay)};
    }
    return Transmitter{BaselineTransmitter(cfg.waveform, cfg.baseline)};
}

PaprExperimentConfig papr_config(const ExperimentConfig& cfg) {
    PaprExperimentConfig p = cfg.papr;
    p.rates = cfg.rates;
    p.payload = cfg.payload;
    p.seed = cfg.seed;
    p.threads = cfg.threads;
    p.ldr_second = cfg.ldr_second;
    return p;
}

PsdExperimentConfig psd_config(const ExperimentConfig& cfg) {
    PsdExperimentConfig p = cfg.psd;
    p.rates = cfg.rates;
    p.payload = cfg.payload;
    p.pa = cfg.pa;
    p.seed = cfg.seed;
    p.threads = cfg.threads;
    return p;
}

BerConfig ber_config(const ExperimentConfig& cfg) {
    BerConfig b = cfg.ber;
    b.rates = cfg.rates;
    b.payload = cfg.payload;
    b.channel = cfg.channel;
    if (cfg.channel == ChannelKind::kFading) {
        b.fading = load_fading_profile(cfg.fading_profile);
    }
    b.pa = cfg.pa;
    b.receiver = cfg.receiver;
    b.seed = cfg.seed;
    b.threads = cfg.threads;
    b.ldr_second = cfg.ldr_second;
    return b;
}

} // namespace wurook
