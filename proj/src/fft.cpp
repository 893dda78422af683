#include "salsaloc/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace salsaloc {

namespace {
// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
    if (n < 2) throw std::invalid_argument("RealFft: size must be >= 2");
    std::lock_guard lock(planner_mutex());
    real_ = fftw_alloc_real(n_);
    auto* c = fftw_alloc_complex(bins());
    cplx_ = c;
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, c, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), c, real_, FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw std::runtime_error("RealFft: FFTW planning failed");
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(real_);
    fftw_free(cplx_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
    if (in.size() != n_ || out.size() != bins()) throw std::invalid_argument("RealFft: size mismatch");
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const auto* c = static_cast<const fftw_complex*>(cplx_);
    for (std::size_t k = 0; k < bins(); ++k) out[k] = {c[k][0], c[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    if (in.size() != bins() || out.size() != n_) throw std::invalid_argument("RealFft: size mismatch");
    auto* c = static_cast<fftw_complex*>(cplx_);
    for (std::size_t k = 0; k < bins(); ++k) {
        c[k][0] = in[k].real();
        c[k][1] = in[k].imag();
    }
    // c2r destroys its input; it is refilled on every call.
    fftw_execute(static_cast<fftw_plan>(inv_));
    std::copy(real_, real_ + n_, out.begin());
}

}  // namespace salsaloc
