#include "wurook/sequences.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include "wurook/fft.hpp"

namespace wurook {

namespace {

char symbol_char(Gint g) {
    if (g == kOne) {
        return '+';
    }
    if (g == kMinusOne) {
        return '-';
    }
    if (g == kI) {
        return 'i';
    }
    if (g == kMinusI) {
        return 'j';
    }
    if (g.is_zero()) {
        return '0';
    }
    return '?';
}

// Units are their own inverse up to conjugation.
Gint unit_div(Gint x, Gint unit) { return x * unit.conj(); }

Coeffs trim(Coeffs c) {
    while (c.size() > 1 && c.back().is_zero()) {
        c.pop_back();
    }
    return c;
}

Coeffs pad_to(Coeffs c, std::size_t n) {
    c.resize(std::max(c.size(), n));
    return c;
}

} // namespace

// ---------------------------------------------------------------------------

ComplexSeq::ComplexSeq(Coeffs c) : c_(std::move(c)) {
    if (c_.empty()) {
        throw InvariantError("ComplexSeq: empty sequence");
    }
    if (!on_alphabet(c_)) {
        throw InvariantError("ComplexSeq: element outside {+1,-1,+i,-i,0}: " + format_coeffs(c_));
    }
}

ComplexSeq ComplexSeq::parse(std::string_view text) { return ComplexSeq(parse_coeffs(text)); }

std::string ComplexSeq::str() const { return format_coeffs(c_); }

long long ComplexSeq::energy() const {
    long long e = 0;
    for (auto g : c_) {
        e += g.norm();
    }
    return e;
}

Coeffs parse_coeffs(std::string_view text) {
    Coeffs out;
    out.reserve(text.size());
    for (char ch : text) {
        switch (ch) {
        case '+':
            out.push_back(kOne);
            break;
        case '-':
            out.push_back(kMinusOne);
            break;
        case 'i':
            out.push_back(kI);
            break;
        case 'j':
            out.push_back(kMinusI);
            break;
        case '0':
            out.emplace_back(0, 0);
            break;
        default:
            throw ConfigError(std::string("sequence literal: invalid character '") + ch + "' in \"" +
                              std::string(text) + "\"");
        }
    }
    return out;
}

std::string format_coeffs(std::span<const Gint> c) {
    std::string s;
    for (auto g : c) {
        const char ch = symbol_char(g);
        if (ch != '?') {
            s.push_back(ch);
        } else {
            s += "(" + std::to_string(g.re) + "," + std::to_string(g.im) + ")";
        }
    }
    return s;
}

bool on_alphabet(std::span<const Gint> c) {
    return std::all_of(c.begin(), c.end(), [](Gint g) { return g.is_zero() || g.is_unit(); });
}

Gint apac(std::span<const Gint> s, long long lag) {
    const auto n = static_cast<long long>(s.size());
    if (lag >= n || -lag >= n) {
        throw std::out_of_range("apac: |lag| must be < sequence length");
    }
    Gint acc;
    if (lag >= 0) {
        for (long long i = 0; i + lag < n; ++i) {
            acc += s[i + lag] * s[i].conj();
        }
    } else {
        for (long long i = -lag; i < n; ++i) {
            acc += s[i + lag] * s[i].conj();
        }
    }
    return acc;
}

std::optional<long long> first_failing_lag(std::span<const Gint> a, std::span<const Gint> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("is_gcp: sequences differ in length");
    }
    for (long long k = 1; k < static_cast<long long>(a.size()); ++k) {
        if (!(apac(a, k) + apac(b, k)).is_zero()) {
            return k;
        }
    }
    return std::nullopt;
}

bool is_gcp(std::span<const Gint> a, std::span<const Gint> b) { return !first_failing_lag(a, b).has_value(); }

Coeffs reverse_conjugate(std::span<const Gint> s) {
    Coeffs out(s.rbegin(), s.rend());
    for (auto& g : out) {
        g = g.conj();
    }
    return out;
}

Coeffs upsample(std::span<const Gint> s, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("upsample: factor must be >= 1");
    }
    if (s.empty()) {
        return {};
    }
    Coeffs out((s.size() - 1) * k + 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[i * k] = s[i];
    }
    return out;
}

Coeffs convolve(std::span<const Gint> a, std::span<const Gint> b) {
    if (a.empty() || b.empty()) {
        return {};
    }
    Coeffs out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) {
            continue;
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

Coeffs add_shifted(std::span<const Gint> a, std::span<const Gint> b, std::size_t shift, Gint scale) {
    Coeffs out(std::max(a.size(), b.size() + shift));
    std::copy(a.begin(), a.end(), out.begin());
    for (std::size_t j = 0; j < b.size(); ++j) {
        out[j + shift] += scale * b[j];
    }
    return out;
}

Coeffs scale(std::span<const Gint> s, Gint u) {
    Coeffs out(s.begin(), s.end());
    for (auto& g : out) {
        g = g * u;
    }
    return out;
}

// ---------------------------------------------------------------------------

GolayPair::GolayPair(Coeffs a, Coeffs b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.empty() || a_.size() != b_.size()) {
        throw InvariantError("GolayPair: sequences must be non-empty and of equal length");
    }
    if (auto lag = first_failing_lag(a_, b_)) {
        throw InvariantError("GolayPair: (" + format_coeffs(a_) + ", " + format_coeffs(b_) +
                             ") is not complementary at lag " + std::to_string(*lag));
    }
}

bool GolayPair::waveform_eligible() const { return on_alphabet(a_) && on_alphabet(b_); }

GolayPair golay_construct(const GolayPair& ab, const GolayPair& cd, const TheoremParams& p, Eligibility e) {
    if (!p.theta1.is_unit() || !p.theta2.is_unit()) {
        throw std::invalid_argument("golay_construct: phases must be unit-modulus Gaussian integers");
    }
    if (p.k == 0 || p.l == 0) {
        throw std::invalid_argument("golay_construct: k and l must be >= 1");
    }
    const Coeffs ak = upsample(ab.a(), p.k);
    const Coeffs bk = upsample(ab.b(), p.k);
    const Coeffs cl = upsample(cd.a(), p.l);
    const Coeffs dl = upsample(cd.b(), p.l);
    const Coeffs ct = upsample(reverse_conjugate(cd.a()), p.l);
    const Coeffs dt = upsample(reverse_conjugate(cd.b()), p.l);

    const Coeffs f = add_shifted(scale(convolve(ak, cl), p.theta1), convolve(bk, dl), p.m, p.theta2);
    const Coeffs g = add_shifted(scale(convolve(ak, dt), p.theta1), convolve(bk, ct), p.m, -p.theta2);

    // f and g share a length by construction (both span max(.., ..+m)).
    GolayPair out(pad_to(f, g.size()), pad_to(g, f.size()));
    if (e == Eligibility::kWaveform && !out.waveform_eligible()) {
        throw InvariantError("golay_construct: overlapping supports left the {unit, 0} alphabet: " +
                             format_coeffs(out.a()) + " / " + format_coeffs(out.b()));
    }
    return out;
}

GolayPair golay_construct(std::span<const Gint> a, std::span<const Gint> b, std::span<const Gint> c,
                          std::span<const Gint> d, const TheoremParams& p, Eligibility e) {
    auto checked = [](std::span<const Gint> x, std::span<const Gint> y, const char* name) {
        if (x.size() != y.size() || x.empty() || !is_gcp(x, y)) {
            throw std::invalid_argument(std::string("golay_construct: input pair ") + name + " is not a GCP");
        }
        return GolayPair(Coeffs(x.begin(), x.end()), Coeffs(y.begin(), y.end()));
    };
    return golay_construct(checked(a, b, "(a,b)"), checked(c, d, "(c,d)"), p, e);
}

std::vector<std::pair<Coeffs, Coeffs>> enumerate_quaternary_gcps(std::size_t length) {
    if (length == 0 || length > 8) {
        throw std::invalid_argument("enumerate_quaternary_gcps: length must be in 1..8");
    }
    std::size_t total = 1;
    for (std::size_t i = 0; i < length; ++i) {
        total *= 4;
    }
    auto decode = [length](std::size_t idx) {
        Coeffs s(length);
        for (std::size_t i = 0; i < length; ++i) {
            s[i] = kQpskUnits[idx % 4];
            idx /= 4;
        }
        return s;
    };
    auto signature = [length](const Coeffs& s, bool negate) {
        std::vector<long long> sig;
        sig.reserve(2 * length);
        for (std::size_t k = 1; k < length; ++k) {
            Gint v = apac(s, static_cast<long long>(k));
            if (negate) {
                v = -v;
            }
            sig.push_back(v.re);
            sig.push_back(v.im);
        }
        return sig;
    };

    std::map<std::vector<long long>, std::vector<std::size_t>> by_signature;
    for (std::size_t idx = 0; idx < total; ++idx) {
        by_signature[signature(decode(idx), false)].push_back(idx);
    }
    std::vector<std::pair<Coeffs, Coeffs>> out;
    for (std::size_t idx = 0; idx < total; ++idx) {
        const Coeffs a = decode(idx);
        auto it = by_signature.find(signature(a, true));
        if (it == by_signature.end()) {
            continue;
        }
        for (std::size_t j : it->second) {
            if (j >= idx) {
                out.emplace_back(a, decode(j));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

ChannelPattern pattern_from_string(std::string_view bits) {
    if (bits.size() != 4) {
        throw ConfigError("channel pattern must have 4 characters: \"" + std::string(bits) + "\"");
    }
    ChannelPattern p{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (bits[i] != '0' && bits[i] != '1') {
            throw ConfigError("channel pattern must contain only 0/1: \"" + std::string(bits) + "\"");
        }
        p[i] = bits[i] == '1';
    }
    return p;
}

std::string pattern_to_string(const ChannelPattern& p) {
    std::string s;
    for (bool b : p) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

int pattern_index(const ChannelPattern& p) { return (p[0] << 3) | (p[1] << 2) | (p[2] << 1) | int(p[3]); }

ChannelPattern pattern_from_index(int idx) {
    if (idx < 0 || idx > 15) {
        throw std::out_of_range("pattern index must be in 0..15");
    }
    return {(idx & 8) != 0, (idx & 4) != 0, (idx & 2) != 0, (idx & 1) != 0};
}

bool is_starred(const ChannelPattern& p) {
    const int idx = pattern_index(p);
    return idx == 0b1101 || idx == 0b1011;
}

std::size_t starred_channel(const ChannelPattern& p) {
    const int idx = pattern_index(p);
    if (idx == 0b1101) {
        return 1;
    }
    if (idx == 0b1011) {
        return 2;
    }
    throw std::invalid_argument("pattern " + pattern_to_string(p) + " is not a starred pattern");
}

std::size_t ChannelSequenceSet::active_count() const {
    return static_cast<std::size_t>(
        std::count_if(per_channel.begin(), per_channel.end(), [](const auto& s) { return s.has_value(); }));
}

long long ChannelSequenceSet::energy() const {
    long long e = 0;
    for (const auto& s : per_channel) {
        if (s) {
            e += s->energy();
        }
    }
    return e;
}

ComplexSeq join_with_dc(const ComplexSeq& a, const ComplexSeq& b, Gint t1, Gint t2) {
    Coeffs c = scale(a.coeffs(), t1);
    c.emplace_back(0, 0);
    const Coeffs tb = scale(b.coeffs(), t2);
    c.insert(c.end(), tb.begin(), tb.end());
    return ComplexSeq(std::move(c));
}

ChannelSequenceSet table1_select(const ChannelPattern& bits, const BasePair& base, TableVariant variant) {
    const auto& a = base.a;
    const auto& b = base.b;
    const ComplexSeq f = join_with_dc(a, b);                        // (a, 0, b)
    const ComplexSeq g = join_with_dc(a, b, kOne, kMinusOne);       // (a, 0, -b)
    const ComplexSeq ia_b = join_with_dc(a, b, kI, kOne);           // (ia, 0, b)
    const ComplexSeq ja_mb = join_with_dc(a, b, kMinusI, kMinusOne); // (ja, 0, -b)
    const ComplexSeq ma_mb = join_with_dc(a, b, kMinusOne, kMinusOne);
    const ComplexSeq ma_b = join_with_dc(a, b, kMinusOne, kOne);

    ChannelSequenceSet s;
    auto& c = s.per_channel;
    switch (pattern_index(bits)) {
    case 0b0000:
        break;
    case 0b1000:
        c[0] = f;
        break;
    case 0b0100:
        c[1] = f;
        break;
    case 0b1100:
        c[0] = f, c[1] = g;
        break;
    case 0b0010:
        c[2] = g;
        break;
    case 0b1010:
        c[0] = f, c[2] = g;
        break;
    case 0b0110:
        c[1] = f, c[2] = g;
        break;
    case 0b1110:
        c[0] = f, c[1] = ia_b, c[2] = g;
        break;
    case 0b0001:
        c[3] = f;
        break;
    case 0b1001:
        c[0] = f, c[3] = g;
        break;
    case 0b0101:
        c[1] = f, c[3] = g;
        break;
    case 0b1101:
        c[0] = f, c[1] = ia_b, c[3] = g;
        break;
    case 0b0011:
        c[2] = f, c[3] = g;
        break;
    case 0b1011:
        c[0] = f, c[2] = ja_mb, c[3] = g;
        break;
    case 0b0111:
        c[1] = f, c[2] = ia_b, c[3] = g;
        break;
    case 0b1111:
        if (variant == TableVariant::kLiteral) {
            c[0] = f, c[1] = g, c[2] = ma_mb, c[3] = ma_b;
        } else {
            c[0] = f, c[1] = g, c[2] = ma_mb, c[3] = g;
        }
        break;
    default:
        break;
    }
    s.is_cs = !is_starred(bits);
    return s;
}

// ---------------------------------------------------------------------------

std::vector<cf64> embed_on_grid(const ChannelSequenceSet& set, const std::array<int, 4>& center_bins,
                                std::size_t fft_size) {
    const long long n = static_cast<long long>(fft_size);
    std::vector<cf64> grid(fft_size);
    std::vector<bool> used(fft_size, false);
    for (std::size_t ch = 0; ch < 4; ++ch) {
        if (!set.per_channel[ch]) {
            continue;
        }
        const auto& seq = *set.per_channel[ch];
        const long long half = static_cast<long long>(seq.size() / 2);
        for (std::size_t j = 0; j < seq.size(); ++j) {
            const long long bin = center_bins[ch] - half + static_cast<long long>(j);
            if (bin <= -n / 2 || bin >= n / 2) {
                throw ConfigError("embed_on_grid: channel " + std::to_string(ch + 1) + " footprint leaves the grid");
            }
            const auto idx = static_cast<std::size_t>((bin + n) % n);
            if (used[idx]) {
                throw ConfigError("embed_on_grid: channel footprints overlap at bin " + std::to_string(bin));
            }
            used[idx] = true;
            grid[idx] = seq[j].to_complex();
        }
    }
    return grid;
}

namespace {

struct Block {
    long long offset; // bin of element 0
    Coeffs c;
};

Coeffs compose(std::span<const Block> blocks) {
    const long long base = blocks.front().offset;
    Coeffs out;
    for (const auto& b : blocks) {
        out = add_shifted(out, b.c, static_cast<std::size_t>(b.offset - base));
    }
    return out;
}

std::optional<Coeffs> find_partner(std::span<const Block> blocks) {
    const std::size_t n = blocks.size();
    if (n == 1) {
        // (p, 0, q) = P(z) + Q(z) z^(h+1)
        const Coeffs& x = blocks[0].c;
        const std::size_t h = x.size() / 2;
        if (x.size() % 2 == 0 || !x[h].is_zero()) {
            return std::nullopt;
        }
        std::span<const Gint> p(x.data(), h);
        std::span<const Gint> q(x.data() + h + 1, h);
        if (!is_gcp(p, q)) {
            return std::nullopt;
        }
        return add_shifted(p, q, h + 1, kMinusOne);
    }
    if (n == 2 || n == 4) {
        // composite = P + Q z^D with (P, Q) complementary -> partner P - Q z^D
        const auto first = blocks.subspan(0, n / 2);
        const auto second = blocks.subspan(n / 2);
        const Coeffs p = compose(first);
        const Coeffs q = compose(second);
        const std::size_t len = std::max(p.size(), q.size());
        if (!is_gcp(pad_to(p, len), pad_to(q, len))) {
            return std::nullopt;
        }
        return add_shifted(p, q, static_cast<std::size_t>(second.front().offset - first.front().offset),
                           kMinusOne);
    }
    if (n == 3) {
        // Interleaved form A(z^k) C(z) + B(z^k) D(z) z^(h+1) with equal spacing k.
        const long long k = blocks[1].offset - blocks[0].offset;
        if (blocks[2].offset - blocks[1].offset != k) {
            return std::nullopt;
        }
        const std::size_t h = blocks[0].c.size() / 2;
        auto half = [h](const Coeffs& x, bool upper) {
            return Coeffs(x.begin() + (upper ? static_cast<long>(h) + 1 : 0),
                          x.begin() + (upper ? static_cast<long>(2 * h) + 1 : static_cast<long>(h)));
        };
        const Coeffs c = half(blocks[0].c, false);
        const Coeffs d = half(blocks[0].c, true);
        if (c.empty() || !c[0].is_unit() || !d[0].is_unit()) {
            return std::nullopt;
        }
        Coeffs a(3), b(3);
        for (std::size_t j = 0; j < 3; ++j) {
            a[j] = unit_div(half(blocks[j].c, false)[0], c[0]);
            b[j] = unit_div(half(blocks[j].c, true)[0], d[0]);
        }
        if (!is_gcp(a, b) || !is_gcp(c, d)) {
            return std::nullopt;
        }
        const GolayPair pair =
            golay_construct(GolayPair(a, b), GolayPair(c, d), {kOne, kOne, static_cast<std::size_t>(k), 1, h + 1});
        if (trim(pair.a()) != trim(compose(blocks))) {
            return std::nullopt;
        }
        return pair.b();
    }
    return std::nullopt;
}

} // namespace

Coeffs composite_coeffs(const ChannelSequenceSet& set, const std::array<int, 4>& center_bins) {
    std::vector<Block> blocks;
    for (std::size_t ch = 0; ch < 4; ++ch) {
        if (set.per_channel[ch]) {
            const auto& s = *set.per_channel[ch];
            blocks.push_back({center_bins[ch] - static_cast<long long>(s.size() / 2), s.coeffs()});
        }
    }
    if (blocks.empty()) {
        return {};
    }
    std::sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) { return x.offset < y.offset; });
    return compose(blocks);
}

std::optional<GolayPair> certify_composite(const ChannelSequenceSet& set, const std::array<int, 4>& center_bins) {
    std::vector<Block> blocks;
    for (std::size_t ch = 0; ch < 4; ++ch) {
        if (set.per_channel[ch]) {
            const auto& s = *set.per_channel[ch];
            blocks.push_back({center_bins[ch] - static_cast<long long>(s.size() / 2), s.coeffs()});
        }
    }
    if (blocks.empty()) {
        return std::nullopt;
    }
    std::sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) { return x.offset < y.offset; });
    const auto partner = find_partner(blocks);
    if (!partner) {
        return std::nullopt;
    }
    const Coeffs v = compose(blocks);
    const std::size_t len = std::max(v.size(), partner->size());
    if (!is_gcp(pad_to(v, len), pad_to(*partner, len))) {
        return std::nullopt;
    }
    return GolayPair(pad_to(v, len), pad_to(*partner, len));
}

double symbol_papr_db(const ChannelSequenceSet& set, const AllocationGeometry& geometry) {
    const auto grid = embed_on_grid(set, geometry.center_bins, geometry.fft_size);
    std::vector<cf64> time(geometry.fft_size);
    Fft fft(geometry.fft_size);
    fft.inverse_unitary(grid, time);
    return papr_db(time);
}

PhaseSearchResult qpsk_phase_search(const ChannelPattern& pattern, const AllocationGeometry& geometry,
                                    const BasePair& base) {
    const std::size_t ch = starred_channel(pattern);
    const ChannelSequenceSet row = table1_select(pattern, base);
    const auto grid_size = geometry.fft_size;
    Fft fft(grid_size);
    std::vector<cf64> time(grid_size);

    PhaseSearchResult best;
    best.papr_db = std::numeric_limits<double>::infinity();
    for (std::size_t i1 = 0; i1 < 4; ++i1) {
        for (std::size_t i2 = 0; i2 < 4; ++i2) {
            ChannelSequenceSet cand = row;
            const Gint t1 = kQpskUnits[i1];
            const Gint t2 = kQpskUnits[i2];
            cand.per_channel[ch] = join_with_dc(base.a, base.b, t1, -t2);
            fft.inverse_unitary(embed_on_grid(cand, geometry.center_bins, grid_size), time);
            const double p = papr_db(time);
            best.candidate_papr_db[4 * i1 + i2] = p;
            if (p < best.papr_db) {
                best.papr_db = p;
                best.theta1 = t1;
                best.theta2 = t2;
                best.set = cand;
            }
        }
    }
    best.set.is_cs = false;
    return best;
}

} // namespace wurook
