// Thin RAII wrapper around FFTW plus a couple of shared DSP helpers.
#pragma once

#include <memory>
#include <span>

#include "wurook/types.hpp"

namespace wurook {

/// Fixed-size complex DFT. Plans are created once (serialized, FFTW's
/// planner is not reentrant) and may be executed concurrently afterwards.
class Fft {
  public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&&) noexcept;
    Fft& operator=(Fft&&) noexcept;

    [[nodiscard]] std::size_t size() const { return n_; }

    /// out[k] = sum_n in[n] e^{-j 2 pi k n / N}  (no scaling)
    void forward(std::span<const cf64> in, std::span<cf64> out) const;
    /// out[n] = sum_k in[k] e^{+j 2 pi k n / N}  (no scaling)
    void backward(std::span<const cf64> in, std::span<cf64> out) const;
    /// Unitary inverse DFT: backward() scaled by 1/sqrt(N).
    void inverse_unitary(std::span<const cf64> in, std::span<cf64> out) const;

  private:
    struct Plans;
    std::size_t n_;
    std::unique_ptr<Plans> plans_;
};

/// 10 log10(max |x|^2 / mean |x|^2). Throws InvariantError on an all-zero input.
double papr_db(std::span<const cf64> x);

/// True if n is a power of two (n >= 1).
constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace wurook
