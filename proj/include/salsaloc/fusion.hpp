#pragma once

#include "salsaloc/labels.hpp"
#include "salsaloc/predictor.hpp"

#include <map>
#include <vector>

namespace salsaloc {

struct FusionConfig {
    /// Weight on the current raw DOA. 0.5 gives the equal-weight update
    /// (y_N + y_{N-1} + y'_N) / 2; 1.0 returns the raw DOAs.
    double alpha = 0.5;
    /// Use the previous fused estimate instead of the previous raw DOA.
    bool recursive = false;
    int gap_frames = kDefaultGapFrames;
};

/// Per-class update over active segments, before normalization:
///   segment start:  y_final = y_N
///   otherwise:      y_final = alpha y_N + (1 - alpha) (prev + y'_N)
/// where prev is the raw (or, if recursive, fused) value at the previous
/// active frame of the class. Segments restart after gap_frames or more
/// inactive frames. Throws std::invalid_argument for alpha outside [0, 1].
std::map<ClassFrame, Vec3> fuse_unnormalized(const PredictorOutput& preds, const FusionConfig& config);

/// fuse_unnormalized, then each vector scaled to unit norm. Output tracks
/// carry id 0 (one estimate per class). Throws NumericError if a fused
/// vector has zero norm.
TrajectorySet fuse(const PredictorOutput& preds, const FusionConfig& config);

/// Raw DOAs normalized, the alpha = 1 path.
TrajectorySet raw_trajectories(const PredictorOutput& preds);

struct FusionRow {
    int frame = 0;
    int class_id = 0;
    Vec3 raw;
    Vec3 fused;
    Vec3 truth;
    double raw_error_deg = 0.0;
    double fused_error_deg = 0.0;
    double derivative_norm = 0.0;
};

/// One row per (frame, class) of `raw`. Truth is the lowest-id track of the
/// class in that frame. Throws DataError if raw and fused cover different
/// (frame, class) sets or truth is missing.
std::vector<FusionRow> fuse_report(const PredictorOutput& raw, const TrajectorySet& fused,
                                   const TrajectorySet& truth);

}  // namespace salsaloc
