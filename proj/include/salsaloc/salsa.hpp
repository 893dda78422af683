#pragma once

// SALSA-Lite features: M log-power spectrograms stacked with M-1
// frequency-normalized interchannel phase differences (NIPD), sharing one
// STFT so every (t, f) cell of every channel comes from the same bin.

#include "salsaloc/audio.hpp"
#include "salsaloc/geometry.hpp"
#include "salsaloc/tensor.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace salsaloc {

inline constexpr double kLogPowerFloor = 1e-12;

/// Complex T x F x M short-time spectra.
struct StftTensor {
    std::size_t frames = 0;
    std::size_t freqs = 0;
    std::size_t channels = 0;
    std::size_t window_size = 0;
    std::size_t hop_size = 0;
    double sample_rate = 0.0;
    std::vector<std::complex<double>> bins;

    std::complex<double>& at(std::size_t t, std::size_t f, std::size_t m) {
        return bins[(t * freqs + f) * channels + m];
    }
    const std::complex<double>& at(std::size_t t, std::size_t f, std::size_t m) const {
        return bins[(t * freqs + f) * channels + m];
    }
    double bin_frequency(std::size_t f) const {
        return static_cast<double>(f) * sample_rate / static_cast<double>(window_size);
    }
};

/// Periodic Hann window, onesided transform. Frame t covers samples
/// [t*hop, t*hop + window); no padding. Throws std::invalid_argument for a
/// non power-of-two window or hop > window, DataError for audio shorter
/// than one window.
StftTensor stft(const MultichannelAudio& audio, std::size_t window_size, std::size_t hop_size);

/// (M-1) x T x F, meters. Lambda = (c / 2 pi f) arg(conj(X_ref) X_m) with
/// arg in (-pi, pi]. Under the e^{-j w t} analysis convention this equals the
/// rdoa of mic m for a far-field plane wave as long as 2 pi f d / c stays
/// inside (-pi, pi]; beyond that it wraps. DC is set to 0.
Tensor nipd(const StftTensor& spec, const ArrayGeometry& geom);

/// M x T x F, 10 log10(|X|^2 + 1e-12).
Tensor log_power(const StftTensor& spec);

struct FeatureConfig {
    std::size_t window_size = 512;
    std::size_t hop_size = 240;
    double band_lo_hz = 50.0;
    double band_hi_hz = 2000.0;
};

struct SalsaLiteFeature {
    Tensor data;  ///< (2M-1) x T x F
    std::size_t log_power_channels = 0;  ///< M; channels [M, 2M-1) are NIPD
    std::size_t first_bin = 0;           ///< STFT bin index of frequency row 0
    std::vector<double> freqs_hz;        ///< centre frequency per row
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
    std::size_t hop_size = 0;
    double sample_rate = 0.0;

    std::size_t channels() const { return data.dim(0); }
    std::size_t frames() const { return data.dim(1); }
    std::size_t freqs() const { return data.dim(2); }
};

/// Bins whose centre frequency lies in [lo, hi], as [first, last).
std::pair<std::size_t, std::size_t> band_bins(std::size_t window_size, double sample_rate,
                                              double band_lo_hz, double band_hi_hz);

/// Stacks log-power and NIPD channels and keeps only rows inside the band.
/// Throws ConfigError when the band is empty or beyond Nyquist.
SalsaLiteFeature extract(const MultichannelAudio& audio, const ArrayGeometry& geom,
                         const FeatureConfig& config);

}  // namespace salsaloc
