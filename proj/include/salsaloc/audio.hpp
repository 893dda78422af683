#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>

namespace salsaloc {

using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// M channels x N samples. Row m is channel m.
struct MultichannelAudio {
    SampleMatrix samples;
    double sample_rate = 24000.0;

    std::size_t channels() const { return static_cast<std::size_t>(samples.rows()); }
    std::size_t length() const { return static_cast<std::size_t>(samples.cols()); }
    double duration_s() const { return static_cast<double>(length()) / sample_rate; }

    /// Mean of x^2 over all channels and samples.
    double mean_power() const;
};

/// Writes RIFF/WAVE, IEEE float32, interleaved. Throws DataError on I/O failure
/// or non-finite samples.
void write_wav(const std::filesystem::path& path, const MultichannelAudio& audio);

/// Reads IEEE float32 or 16/24/32-bit PCM WAV files (including the
/// WAVE_FORMAT_EXTENSIBLE wrapper). Throws DataError on malformed input.
MultichannelAudio read_wav(const std::filesystem::path& path);

}  // namespace salsaloc
