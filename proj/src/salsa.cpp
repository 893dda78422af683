#include "salsaloc/salsa.hpp"
#include "salsaloc/errors.hpp"
#include "salsaloc/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace salsaloc {

StftTensor stft(const MultichannelAudio& audio, std::size_t window_size, std::size_t hop_size) {
    if (window_size < 2 || (window_size & (window_size - 1)) != 0)
        throw std::invalid_argument("stft: window size must be a power of two");
    if (hop_size == 0 || hop_size > window_size)
        throw std::invalid_argument("stft: hop must be in [1, window]");
    if (audio.length() < window_size) throw DataError("stft: audio shorter than one window");

    StftTensor out;
    out.window_size = window_size;
    out.hop_size = hop_size;
    out.sample_rate = audio.sample_rate;
    out.channels = audio.channels();
    out.freqs = window_size / 2 + 1;
    out.frames = (audio.length() - window_size) / hop_size + 1;
    out.bins.resize(out.frames * out.freqs * out.channels);

    std::vector<double> window(window_size);
    for (std::size_t n = 0; n < window_size; ++n)
        window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                         static_cast<double>(window_size));

    RealFft fft(window_size);
    std::vector<double> frame(window_size);
    std::vector<std::complex<double>> spectrum(out.freqs);
    for (std::size_t m = 0; m < out.channels; ++m) {
        const auto row = audio.samples.row(static_cast<Eigen::Index>(m));
        for (std::size_t t = 0; t < out.frames; ++t) {
            const std::size_t start = t * hop_size;
            for (std::size_t n = 0; n < window_size; ++n)
                frame[n] = window[n] * row(static_cast<Eigen::Index>(start + n));
            fft.forward(frame, spectrum);
            for (std::size_t f = 0; f < out.freqs; ++f) out.at(t, f, m) = spectrum[f];
        }
    }
    return out;
}

Tensor nipd(const StftTensor& spec, const ArrayGeometry& geom) {
    if (spec.channels != geom.mic_count())
        throw DataError("nipd: channel count does not match array geometry");
    const auto others = geom.others();
    const std::size_t ref = geom.reference_index();
    const double c = geom.speed_of_sound();
    Tensor out({others.size(), spec.frames, spec.freqs});
    for (std::size_t k = 0; k < others.size(); ++k)
        for (std::size_t t = 0; t < spec.frames; ++t)
            for (std::size_t f = 1; f < spec.freqs; ++f) {
                const double scale = c / (2.0 * std::numbers::pi * spec.bin_frequency(f));
                out(k, t, f) = scale * std::arg(std::conj(spec.at(t, f, ref)) * spec.at(t, f, others[k]));
            }
    return out;
}

Tensor log_power(const StftTensor& spec) {
    Tensor out({spec.channels, spec.frames, spec.freqs});
    for (std::size_t m = 0; m < spec.channels; ++m)
        for (std::size_t t = 0; t < spec.frames; ++t)
            for (std::size_t f = 0; f < spec.freqs; ++f)
                out(m, t, f) = 10.0 * std::log10(std::norm(spec.at(t, f, m)) + kLogPowerFloor);
    return out;
}

std::pair<std::size_t, std::size_t> band_bins(std::size_t window_size, double sample_rate,
                                              double band_lo_hz, double band_hi_hz) {
    const double df = sample_rate / static_cast<double>(window_size);
    const std::size_t first = static_cast<std::size_t>(std::ceil(band_lo_hz / df));
    const std::size_t last = static_cast<std::size_t>(std::floor(band_hi_hz / df)) + 1;
    return {first, std::max(first, last)};
}

SalsaLiteFeature extract(const MultichannelAudio& audio, const ArrayGeometry& geom,
                         const FeatureConfig& config) {
    const double nyquist = audio.sample_rate / 2.0;
    if (!(config.band_lo_hz >= 0.0)) throw ConfigError("features.band_lo_hz", "must be >= 0");
    if (!(config.band_hi_hz <= nyquist))
        throw ConfigError("features.band_hi_hz", "must not exceed Nyquist");
    if (!(config.band_lo_hz < config.band_hi_hz))
        throw ConfigError("features.band_lo_hz", "must be below band_hi_hz");
    const auto [first, last] =
        band_bins(config.window_size, audio.sample_rate, config.band_lo_hz, config.band_hi_hz);
    if (first >= last) throw ConfigError("features.band_lo_hz", "band contains no STFT bins");

    const StftTensor spec = stft(audio, config.window_size, config.hop_size);
    const Tensor power = log_power(spec);
    const Tensor phase = nipd(spec, geom);
    const std::size_t mics = spec.channels;
    const std::size_t rows = last - first;

    SalsaLiteFeature out;
    out.data = Tensor({2 * mics - 1, spec.frames, rows});
    out.log_power_channels = mics;
    out.first_bin = first;
    out.band_lo_hz = config.band_lo_hz;
    out.band_hi_hz = config.band_hi_hz;
    out.hop_size = config.hop_size;
    out.sample_rate = audio.sample_rate;
    for (std::size_t r = 0; r < rows; ++r) out.freqs_hz.push_back(spec.bin_frequency(first + r));

    for (std::size_t t = 0; t < spec.frames; ++t)
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t m = 0; m < mics; ++m) out.data(m, t, r) = power(m, t, first + r);
            for (std::size_t k = 0; k + 1 < mics; ++k) out.data(mics + k, t, r) = phase(k, t, first + r);
        }
    return out;
}

}  // namespace salsaloc
