#include "wurook/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

namespace wurook {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cf64* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cf64* p) { return reinterpret_cast<fftw_complex*>(const_cast<cf64*>(p)); }
} // namespace

struct Fft::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

Fft::Fft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
    if (n == 0) {
        throw std::invalid_argument("Fft: size must be positive");
    }
    std::vector<cf64> a(n), b(n);
    const int ni = static_cast<int>(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plans_->fwd = fftw_plan_dft_1d(ni, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_->bwd = fftw_plan_dft_1d(ni, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Fft::~Fft() {
    if (plans_) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (plans_->fwd) {
            fftw_destroy_plan(plans_->fwd);
        }
        if (plans_->bwd) {
            fftw_destroy_plan(plans_->bwd);
        }
    }
}

Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::span<const cf64> in, std::span<cf64> out) const {
    if (in.size() != n_ || out.size() != n_) {
        throw std::invalid_argument("Fft::forward: size mismatch");
    }
    fftw_execute_dft(plans_->fwd, as_fftw(in.data()), as_fftw(out.data()));
}

void Fft::backward(std::span<const cf64> in, std::span<cf64> out) const {
    if (in.size() != n_ || out.size() != n_) {
        throw std::invalid_argument("Fft::backward: size mismatch");
    }
    fftw_execute_dft(plans_->bwd, as_fftw(in.data()), as_fftw(out.data()));
}

void Fft::inverse_unitary(std::span<const cf64> in, std::span<cf64> out) const {
    backward(in, out);
    const double s = 1.0 / std::sqrt(static_cast<double>(n_));
    for (auto& v : out) {
        v *= s;
    }
}

double papr_db(std::span<const cf64> x) {
    double peak = 0.0;
    double acc = 0.0;
    for (const auto& v : x) {
        const double p = std::norm(v);
        peak = std::max(peak, p);
        acc += p;
    }
    if (acc <= 0.0) {
        throw InvariantError("papr_db: all-zero input");
    }
    return 10.0 * std::log10(peak * static_cast<double>(x.size()) / acc);
}

} // namespace wurook
