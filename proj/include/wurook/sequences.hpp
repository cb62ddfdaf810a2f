// Complementary-sequence algebra over Gaussian integers.
//
// Sequence elements are held as exact Gaussian integers so aperiodic
// autocorrelations and complementarity checks carry no rounding. Floating
// point enters only when a sequence set is mapped onto a DFT grid.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wurook/types.hpp"

namespace wurook {

/// Gaussian integer re + i*im.
struct Gint {
    long long re = 0;
    long long im = 0;

    constexpr Gint() = default;
    constexpr Gint(long long r, long long i = 0) : re(r), im(i) {}

    friend constexpr Gint operator+(Gint a, Gint b) { return {a.re + b.re, a.im + b.im}; }
    friend constexpr Gint operator-(Gint a, Gint b) { return {a.re - b.re, a.im - b.im}; }
    friend constexpr Gint operator-(Gint a) { return {-a.re, -a.im}; }
    friend constexpr Gint operator*(Gint a, Gint b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    constexpr Gint& operator+=(Gint b) { return *this = *this + b; }
    friend constexpr bool operator==(Gint a, Gint b) = default;

    [[nodiscard]] constexpr Gint conj() const { return {re, -im}; }
    [[nodiscard]] constexpr long long norm() const { return re * re + im * im; }
    [[nodiscard]] constexpr bool is_zero() const { return re == 0 && im == 0; }
    [[nodiscard]] constexpr bool is_unit() const { return norm() == 1; }
    [[nodiscard]] cf64 to_complex() const { return {static_cast<double>(re), static_cast<double>(im)}; }
};

inline constexpr Gint kOne{1, 0};
inline constexpr Gint kMinusOne{-1, 0};
inline constexpr Gint kI{0, 1};
inline constexpr Gint kMinusI{0, -1};

/// The four QPSK units in the fixed enumeration order (1, -1, i, -i).
inline constexpr std::array<Gint, 4> kQpskUnits{kOne, kMinusOne, kI, kMinusI};

/// Unconstrained coefficient sequence (polynomial coefficients, index 0 first).
using Coeffs = std::vector<Gint>;

/// Sequence over the alphabet {+1, -1, +i, -i, 0}; non-empty.
///
/// Text form uses one character per element: '+', '-', 'i', 'j' (= -i), '0'.
class ComplexSeq {
  public:
    /// Throws InvariantError if empty or any element is outside the alphabet.
    explicit ComplexSeq(Coeffs c);

    static ComplexSeq parse(std::string_view text);

    [[nodiscard]] const Coeffs& coeffs() const { return c_; }
    [[nodiscard]] std::size_t size() const { return c_.size(); }
    [[nodiscard]] Gint operator[](std::size_t i) const { return c_[i]; }
    [[nodiscard]] std::string str() const;
    /// Sum of |x|^2 over elements.
    [[nodiscard]] long long energy() const;

    friend bool operator==(const ComplexSeq&, const ComplexSeq&) = default;

  private:
    Coeffs c_;
};

/// Parses the text alphabet into raw coefficients.
Coeffs parse_coeffs(std::string_view text);
/// Formats coefficients; elements outside the alphabet are written as "(re,im)".
std::string format_coeffs(std::span<const Gint> c);
bool on_alphabet(std::span<const Gint> c);

/// Aperiodic autocorrelation sum_n s[n+lag] conj(s[n]). Requires |lag| < size.
Gint apac(std::span<const Gint> s, long long lag);

/// True iff apac(a,k) + apac(b,k) == 0 for k = 1..L-1. Throws on length mismatch.
bool is_gcp(std::span<const Gint> a, std::span<const Gint> b);

/// First lag k >= 1 where the pair fails complementarity, if any.
std::optional<long long> first_failing_lag(std::span<const Gint> a, std::span<const Gint> b);

Coeffs reverse_conjugate(std::span<const Gint> s);
/// Inserts k-1 zeros between elements (polynomial A(z^k)).
Coeffs upsample(std::span<const Gint> s, std::size_t k);
Coeffs convolve(std::span<const Gint> a, std::span<const Gint> b);
/// Coefficient-wise a + scale * b * z^shift.
Coeffs add_shifted(std::span<const Gint> a, std::span<const Gint> b, std::size_t shift, Gint scale = kOne);
Coeffs scale(std::span<const Gint> s, Gint u);

/// A pair verified at construction to be complementary.
class GolayPair {
  public:
    /// Throws InvariantError naming the first failing lag when (a, b) is not a GCP.
    GolayPair(Coeffs a, Coeffs b);

    [[nodiscard]] const Coeffs& a() const { return a_; }
    [[nodiscard]] const Coeffs& b() const { return b_; }
    [[nodiscard]] std::size_t size() const { return a_.size(); }
    /// Both sequences lie on the {unit, 0} alphabet.
    [[nodiscard]] bool waveform_eligible() const;

  private:
    Coeffs a_;
    Coeffs b_;
};

/// Recursive construction parameters. Phases are restricted to Gaussian units
/// so the construction stays exact.
struct TheoremParams {
    Gint theta1 = kOne;
    Gint theta2 = kOne;
    std::size_t k = 1;
    std::size_t l = 1;
    std::size_t m = 0;
};

enum class Eligibility { kGeneral, kWaveform };

/// f(z) = t1 A(z^k) C(z^l) + t2 B(z^k) D(z^l) z^m
/// g(z) = t1 A(z^k) D~(z^l) - t2 B(z^k) C~(z^l) z^m
/// The result is re-verified. With Eligibility::kWaveform an InvariantError is
/// thrown if overlapping supports push an element off the {unit, 0} alphabet.
GolayPair golay_construct(const GolayPair& ab, const GolayPair& cd, const TheoremParams& p,
                          Eligibility e = Eligibility::kGeneral);

/// Overload checking raw inputs; throws std::invalid_argument if either input pair is not a GCP.
GolayPair golay_construct(std::span<const Gint> a, std::span<const Gint> b, std::span<const Gint> c,
                          std::span<const Gint> d, const TheoremParams& p, Eligibility e = Eligibility::kGeneral);

/// All quaternary ({+-1, +-i}) GCPs of the given length, a < b in lexicographic
/// index order, exhaustive. Length must be in 1..8.
std::vector<std::pair<Coeffs, Coeffs>> enumerate_quaternary_gcps(std::size_t length);

// ---------------------------------------------------------------------------
// Multi-channel sequence table

using ChannelPattern = std::array<bool, 4>;

ChannelPattern pattern_from_string(std::string_view bits);
std::string pattern_to_string(const ChannelPattern& p);
/// Pattern index with b1 as the most significant bit ("1000" -> 8).
int pattern_index(const ChannelPattern& p);
ChannelPattern pattern_from_index(int idx);

/// The two patterns with three non-contiguous active channels.
bool is_starred(const ChannelPattern& p);
/// Channel that carries the phase-searched sequence for a starred pattern.
std::size_t starred_channel(const ChannelPattern& p);

/// Length-7 sequence per channel (std::nullopt = all-zero).
struct ChannelSequenceSet {
    std::array<std::optional<ComplexSeq>, 4> per_channel;
    bool is_cs = true;

    [[nodiscard]] bool active(std::size_t ch) const { return per_channel[ch].has_value(); }
    [[nodiscard]] std::size_t active_count() const;
    /// Sum of element energies over all channels.
    [[nodiscard]] long long energy() const;
};

struct BasePair {
    ComplexSeq a = ComplexSeq::parse("+i+");
    ComplexSeq b = ComplexSeq::parse("++-");
};

/// (t1*a, 0, t2*b)
ComplexSeq join_with_dc(const ComplexSeq& a, const ComplexSeq& b, Gint t1 = kOne, Gint t2 = kOne);

enum class TableVariant {
    /// The all-active row follows the text's four-channel construction (f1, g1, -f1, g1).
    kCorrected,
    /// Character-for-character transcription of the published table.
    kLiteral,
};

/// Row of the multi-channel sequence table for the given channel pattern.
ChannelSequenceSet table1_select(const ChannelPattern& bits, const BasePair& base = {},
                                 TableVariant variant = TableVariant::kCorrected);

/// Channel centre bins on a DFT grid of size fft_size (negative = below DC).
struct AllocationGeometry {
    std::array<int, 4> center_bins{-48, -16, 16, 48};
    std::size_t fft_size = 2048;
};

/// Places each channel's 7 elements on bins center-3 .. center+3 of a
/// length-fft_size grid (negative bins wrap). Throws ConfigError on overlap or
/// if a footprint leaves the grid.
std::vector<cf64> embed_on_grid(const ChannelSequenceSet& set, const std::array<int, 4>& center_bins,
                                std::size_t fft_size);

/// The whole allocation as one coefficient vector starting at the lowest used bin.
Coeffs composite_coeffs(const ChannelSequenceSet& set, const std::array<int, 4>& center_bins);

/// Attempts to exhibit a complementary partner for the composite vector of
/// `set`. Returns the certified pair (composite, partner) or nullopt.
std::optional<GolayPair> certify_composite(const ChannelSequenceSet& set, const std::array<int, 4>& center_bins);

struct PhaseSearchResult {
    Gint theta1 = kOne;
    Gint theta2 = kOne;
    double papr_db = 0.0;
    /// PAPR of every candidate, index = 4 * idx(theta1) + idx(theta2) over (1, -1, i, -i).
    std::array<double, 16> candidate_papr_db{};
    ChannelSequenceSet set;
};

/// Exhaustive search over (theta1, theta2) in QPSK^2 for the designated channel
/// of a starred pattern, which carries (theta1*a, 0, -theta2*b). Ties resolve to
/// the first candidate in enumeration order. Throws std::invalid_argument for a
/// non-starred pattern.
PhaseSearchResult qpsk_phase_search(const ChannelPattern& pattern, const AllocationGeometry& geometry = {},
                                    const BasePair& base = {});

/// Oversampled PAPR of the single OFDM symbol carrying `set`.
double symbol_papr_db(const ChannelSequenceSet& set, const AllocationGeometry& geometry);

} // namespace wurook
