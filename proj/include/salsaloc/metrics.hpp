#pragma once

#include "salsaloc/labels.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace salsaloc {

inline constexpr double kDefaultThresholdDeg = 20.0;

/// arccos(n_true . n_pred) in degrees, evaluated as atan2(|n_t x n_p|, n_t . n_p)
/// so identical directions give exactly 0. Throws std::invalid_argument on a zero or
/// non-finite vector.
double doa_error(const Vec3& truth, const Vec3& pred);

struct SourceResult {
    TrackKey track;
    Motion motion = Motion::Static;
    long frames = 0;          ///< scored frames
    long frames_within = 0;   ///< scored frames with error below threshold
    double mean_error_deg = 0.0;
    bool localized = false;   ///< mean error below threshold
};

struct ClassStats {
    double error_sum_deg = 0.0;  ///< over frames of localized sources
    long frames = 0;             ///< frames of localized sources
    /// Mean error, or nullopt when no source of the class was localized.
    std::optional<double> mae() const {
        if (frames == 0) return std::nullopt;
        return error_sum_deg / static_cast<double>(frames);
    }
};

enum class PdMode { Pooled, PerRecording };

/// Frame counts split by static (s) / moving (m) sources. tp/fn count scored
/// frames whose error is below / not below the threshold, so
/// pd = 100 tp / (tp + fn). Source-level outcomes (mean error over the
/// source's frames against the same threshold) are kept separately.
struct EvalReport {
    double threshold_deg = kDefaultThresholdDeg;
    long tp_static = 0, tp_moving = 0, fn_static = 0, fn_moving = 0;
    long sources_tp_static = 0, sources_tp_moving = 0;
    long sources_fn_static = 0, sources_fn_moving = 0;
    long excluded_frames = 0;  ///< (frame, class) pairs with several same-class sources
    std::optional<double> pd_static, pd_moving;
    std::map<int, ClassStats> classwise;  ///< every class with scored frames
    std::vector<SourceResult> sources;
    int recordings = 1;
};

/// Scores `pred` (one direction per (frame, class)) against `truth` on the
/// frames where truth is active. Same-class overlaps are skipped. Throws
/// DataError when pred extends past truth's frame range, holds several
/// entries for one (frame, class), or misses a scored frame.
EvalReport evaluate(const TrajectorySet& pred, const TrajectorySet& truth,
                    const std::map<TrackKey, Motion>& motion,
                    double threshold_deg = kDefaultThresholdDeg);

/// Sums counts across recordings. Pooled: Pd from the summed counts.
/// PerRecording: Pd is the mean of per-recording Pd values that exist.
EvalReport aggregate(std::span<const EvalReport> reports, PdMode mode);

/// Aligned text rows in the column order SNR | Model | TPs TPm FNs FNm Pds Pdm.
std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows,
                         const std::string& condition);

/// Percentage with one decimal, or "NA".
std::string format_pd(const std::optional<double>& pd);

}  // namespace salsaloc
