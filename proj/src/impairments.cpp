#include "wurook/impairments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "wurook/log.hpp"

namespace wurook {

void RappPa::validate() const {
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw ConfigError("Rapp smoothness p must be positive");
    }
    if (!(sat_amplitude > 0.0) || !std::isfinite(sat_amplitude)) {
        throw ConfigError("Rapp saturation amplitude must be positive");
    }
    if (std::isnan(obo_db) || obo_db == -std::numeric_limits<double>::infinity()) {
        throw ConfigError("Rapp OBO must be a number or +inf");
    }
}

double RappPa::am_am(double a) const {
    const double r = a / sat_amplitude;
    return a / std::pow(1.0 + std::pow(r, 2.0 * p), 1.0 / (2.0 * p));
}

namespace {

/// (1 + t)^(-1/p) with t = r2^p; integer p avoids one pow().
double rapp_power_factor(double r2, double p) {
    double t = 0.0;
    if (p == std::floor(p) && p <= 16.0) {
        t = 1.0;
        for (int i = 0; i < static_cast<int>(p); ++i) {
            t *= r2;
        }
    } else {
        t = std::pow(r2, p);
    }
    return p == 3.0 ? 1.0 / std::cbrt(1.0 + t) : std::pow(1.0 + t, -1.0 / p);
}

/// Mean output power for input powers a2 driven with power gain g2.
double mean_output_power(const std::vector<double>& a2, const RappPa& pa, double g2) {
    const double inv_sat2 = 1.0 / (pa.sat_amplitude * pa.sat_amplitude);
    double acc = 0.0;
    for (double v : a2) {
        const double x2 = g2 * v;
        acc += x2 * rapp_power_factor(x2 * inv_sat2, pa.p);
    }
    return a2.empty() ? 0.0 : acc / static_cast<double>(a2.size());
}

} // namespace

double rapp_drive_gain(std::span<const cf64> x, const RappPa& pa) {
    pa.validate();
    if (std::isinf(pa.obo_db)) {
        return 1.0;
    }
    std::vector<double> a2;
    a2.reserve(x.size());
    double amax = 0.0;
    for (const auto& v : x) {
        const double p = std::norm(v);
        if (!std::isfinite(p)) {
            throw ConfigError("rapp_apply: non-finite sample");
        }
        amax = std::max(amax, p);
        if (p > 0.0 || !pa.on_samples_only) {
            a2.push_back(p);
        }
    }
    if (amax == 0.0) {
        throw ConfigError("rapp_apply: zero-energy signal, back-off is undefined");
    }
    const double sat2 = pa.sat_amplitude * pa.sat_amplitude;
    const double target = sat2 / std::pow(10.0, pa.obo_db / 10.0);
    if (!(target < sat2)) {
        throw ConfigError("rapp_apply: OBO must be positive (output cannot reach saturation power)");
    }
    const bool constant = std::all_of(a2.begin(), a2.end(), [&](double v) { return v == a2.front(); });
    if (constant && a2.front() > 0.0) {
        // Invert the AM/AM curve for y^2 = target.
        const double y = std::sqrt(target);
        const double r2p = std::pow(y / pa.sat_amplitude, 2.0 * pa.p);
        const double a_in = y / std::pow(1.0 - r2p, 1.0 / (2.0 * pa.p));
        return a_in / std::sqrt(a2.front());
    }
    // f(u) = log P(e^u) - log target is increasing in the log power gain u.
    // The linear solution is a lower bound; bracket, then Illinois steps.
    double mean_in = 0.0;
    for (double v : a2) {
        mean_in += v;
    }
    mean_in /= static_cast<double>(a2.size());
    auto f = [&](double u) { return std::log(mean_output_power(a2, pa, std::exp(u)) / target); };
    double lo = std::log(target / mean_in);
    double flo = f(lo);
    double hi = lo + std::log(2.0);
    double fhi = f(hi);
    while (fhi < 0.0) {
        lo = hi;
        flo = fhi;
        hi += std::log(4.0);
        fhi = f(hi);
        if (hi - std::log(target / mean_in) > 60.0) {
            throw ConfigError("rapp_apply: back-off target unreachable");
        }
    }
    int side = 0;
    for (int i = 0; i < 100 && hi - lo > 1e-15; ++i) {
        const double u = (lo * fhi - hi * flo) / (fhi - flo);
        const double fu = f(u);
        if (std::abs(fu) < 1e-14) {
            lo = hi = u;
            break;
        }
        if (fu < 0.0) {
            lo = u;
            flo = fu;
            if (side == -1) {
                fhi /= 2.0;
            }
            side = -1;
        } else {
            hi = u;
            fhi = fu;
            if (side == 1) {
                flo /= 2.0;
            }
            side = 1;
        }
    }
    return std::exp(0.25 * (lo + hi));
}

IqSignal rapp_apply(const IqSignal& signal, const RappPa& pa) {
    if (signal.empty()) {
        throw ConfigError("rapp_apply: empty signal");
    }
    const double g = rapp_drive_gain(signal.samples, pa);
    if (std::isinf(pa.obo_db)) {
        return signal;
    }
    IqSignal out = signal;
    for (auto& v : out.samples) {
        const double a = std::abs(v);
        if (a > 0.0) {
            v *= pa.am_am(g * a) / a;
        }
    }
    return out;
}

std::vector<cf64> complex_gaussian(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    std::vector<cf64> out(n);
    for (auto& v : out) {
        const double re = nd(rng);
        v = cf64(re, nd(rng));
    }
    return out;
}

IqSignal awgn_apply(const IqSignal& signal, double snr_db, double ref_power, std::uint64_t seed) {
    if (snr_db == kNoNoise) {
        return signal;
    }
    if (std::isnan(snr_db) || !(ref_power >= 0.0)) {
        throw ConfigError("awgn_apply: invalid SNR or reference power");
    }
    const double sigma = std::sqrt(ref_power / std::pow(10.0, snr_db / 10.0));
    const auto n = complex_gaussian(signal.size(), seed);
    IqSignal out = signal;
    for (std::size_t i = 0; i < n.size(); ++i) {
        out.samples[i] += sigma * n[i];
    }
    return out;
}

void FadingProfile::validate() const {
    if (taps.empty()) {
        throw ConfigError("fading profile has no taps");
    }
    double prev = 0.0;
    for (const auto& t : taps) {
        if (!(t.delay_s >= prev) || !std::isfinite(t.delay_s)) {
            throw ConfigError("fading profile delays must be non-negative and non-decreasing");
        }
        if (!(t.power > 0.0) || !std::isfinite(t.power)) {
            throw ConfigError("fading profile tap powers must be positive");
        }
        prev = t.delay_s;
    }
}

void FadingProfile::normalize() {
    validate();
    double total = 0.0;
    for (const auto& t : taps) {
        total += t.power;
    }
    for (auto& t : taps) {
        t.power /= total;
    }
}

FadingProfile parse_fading_profile(std::string_view csv) {
    FadingProfile prof;
    std::istringstream in{std::string(csv)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("fading profile line " + std::to_string(lineno) + ": expected delay_ns,power_db");
        }
        try {
            std::size_t used = 0;
            const double d = std::stod(line.substr(0, comma), &used);
            const double p = std::stod(line.substr(comma + 1));
            prof.taps.push_back({d * 1e-9, std::pow(10.0, p / 10.0)});
        } catch (const std::invalid_argument&) {
            if (prof.taps.empty() && lineno <= 3) {
                continue; // header
            }
            throw ConfigError("fading profile line " + std::to_string(lineno) + ": not numeric");
        }
    }
    prof.normalize();
    return prof;
}

FadingProfile load_fading_profile(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) {
        throw IoError("cannot open fading profile " + path.string());
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_fading_profile(ss.str());
}

FadingRealization draw_fading(const FadingProfile& profile, double sample_rate) {
    profile.validate();
    const auto z = complex_gaussian(profile.taps.size(), profile.rng_seed);
    FadingRealization h;
    for (std::size_t i = 0; i < profile.taps.size(); ++i) {
        const double exact = profile.taps[i].delay_s * sample_rate;
        const auto d = static_cast<std::size_t>(std::llround(exact));
        h.max_rounding = std::max(h.max_rounding, std::abs(exact - static_cast<double>(d)));
        const cf64 g = std::sqrt(profile.taps[i].power) * z[i];
        if (!h.delay_samples.empty() && h.delay_samples.back() == d) {
            h.gains.back() += g;
        } else {
            h.delay_samples.push_back(d);
            h.gains.push_back(g);
        }
    }
    if (h.max_rounding > 1e-9) {
        logger()->debug("fading: tap delays rounded to the sample grid (max {:.3f} samples)", h.max_rounding);
    }
    return h;
}

IqSignal apply_realization(const IqSignal& signal, const FadingRealization& h) {
    if (h.gains.empty()) {
        throw ConfigError("fading: empty realization");
    }
    IqSignal out;
    out.sample_rate = signal.sample_rate;
    out.samples.assign(signal.size() + h.max_delay(), cf64{});
    for (std::size_t k = 0; k < h.gains.size(); ++k) {
        const cf64 g = h.gains[k];
        auto* dst = out.samples.data() + h.delay_samples[k];
        for (std::size_t i = 0; i < signal.size(); ++i) {
            dst[i] += g * signal.samples[i];
        }
    }
    return out;
}

IqSignal fading_apply(const IqSignal& signal, const FadingProfile& profile) {
    return apply_realization(signal, draw_fading(profile, signal.sample_rate));
}

} // namespace wurook
