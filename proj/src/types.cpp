#include "wurook/types.hpp"

#include <cmath>

namespace wurook {

IqSignal::IqSignal(std::vector<cf64> s, double rate) : samples(std::move(s)), sample_rate(rate) {}

double IqSignal::mean_power() const {
    if (samples.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& x : samples) {
        acc += std::norm(x);
    }
    return acc / static_cast<double>(samples.size());
}

void IqSignal::validate() const {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
        throw ConfigError("IqSignal: sample_rate must be positive");
    }
    for (const auto& x : samples) {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
            throw ConfigError("IqSignal: non-finite sample");
        }
    }
}

std::string to_string(Rate r) {
    switch (r) {
    case Rate::kHdr:
        return "HDR";
    case Rate::kLdr:
        return "LDR";
    case Rate::kInactive:
        break;
    }
    return "INACTIVE";
}

Rate rate_from_string(const std::string& s) {
    if (s == "HDR" || s == "H") {
        return Rate::kHdr;
    }
    if (s == "LDR" || s == "L") {
        return Rate::kLdr;
    }
    if (s == "INACTIVE" || s == "X") {
        return Rate::kInactive;
    }
    throw ConfigError("unknown rate '" + s + "' (expected HDR, LDR or INACTIVE)");
}

} // namespace wurook
