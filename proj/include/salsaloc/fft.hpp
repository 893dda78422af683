#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace salsaloc {

/// Real <-> half-complex FFT of fixed size n, backed by FFTW. Plans are
/// created with FFTW_ESTIMATE so results do not depend on timing. Each
/// instance owns its buffers; use one instance per thread.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return n_; }
    std::size_t bins() const { return n_ / 2 + 1; }

    /// X[k] = sum_n x[n] e^{-j 2 pi k n / N}; `out` has bins() entries.
    void forward(std::span<const double> in, std::span<std::complex<double>> out);
    /// Unnormalized inverse; divide by size() to invert forward().
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
    std::size_t n_;
    double* real_ = nullptr;
    void* cplx_ = nullptr;
    void* fwd_ = nullptr;
    void* inv_ = nullptr;
};

}  // namespace salsaloc
