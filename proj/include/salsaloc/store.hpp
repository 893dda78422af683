#pragma once

// On-disk feature files and regressor checkpoints (TensorFile containers).
//
// feature file entries:
//   features   (2M-1) x T x F, f32
//   freqs_hz   F, f64
//   meta       [log_power_channels, first_bin, band_lo_hz, band_hi_hz, hop_size, sample_rate]
// checkpoint entries:
//   meta.shape [input_dim, hidden1, hidden2, state, classes]
//   input_shift, input_scale, and one entry per parameter block (W1, b1, ...)

#include "salsaloc/predictor.hpp"
#include "salsaloc/salsa.hpp"
#include "salsaloc/tensor.hpp"

#include <filesystem>
#include <vector>

namespace salsaloc {

std::vector<NamedTensor> feature_entries(const SalsaLiteFeature& features);
SalsaLiteFeature features_from_entries(const std::vector<NamedTensor>& entries);
void save_features(const std::filesystem::path& path, const SalsaLiteFeature& features);
SalsaLiteFeature load_features(const std::filesystem::path& path);

std::vector<NamedTensor> checkpoint_entries(const RegressorParams& params);
RegressorParams params_from_entries(const std::vector<NamedTensor>& entries);
void save_checkpoint(const std::filesystem::path& path, const RegressorParams& params);
RegressorParams load_checkpoint(const std::filesystem::path& path);

/// Pooled inputs and per-(frame, class) targets for one recording.
TrainingSequence make_sequence(const SalsaLiteFeature& features, const TrajectorySet& truth,
                               std::size_t frames_per_label, int gap_frames = kDefaultGapFrames);

}  // namespace salsaloc
