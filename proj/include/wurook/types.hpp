// Common value types and the error hierarchy shared by every module.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace wurook {

using cf64 = std::complex<double>;

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (plans, parameters, documents).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A checked mathematical property did not hold.
class InvariantError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

/// Complex baseband sample stream.
struct IqSignal {
    std::vector<cf64> samples;
    double sample_rate = 0.0;

    IqSignal() = default;
    IqSignal(std::vector<cf64> s, double rate);

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] bool empty() const { return samples.empty(); }
    [[nodiscard]] double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

    /// Mean |x|^2 over all samples (0 for an empty signal).
    [[nodiscard]] double mean_power() const;
    /// Throws ConfigError unless sample_rate > 0 and every sample is finite.
    void validate() const;
};

enum class Rate { kInactive, kHdr, kLdr };

std::string to_string(Rate r);
Rate rate_from_string(const std::string& s);

} // namespace wurook
