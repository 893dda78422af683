#pragma once

#include "salsaloc/geometry.hpp"

#include <compare>
#include <map>
#include <optional>
#include <vector>

namespace salsaloc {

inline constexpr int kDefaultGapFrames = 20;
inline constexpr double kDefaultStaticThresholdDeg = 1.0;

struct TrackKey {
    int class_id = 0;
    int track_id = 0;
    auto operator<=>(const TrackKey&) const = default;
};

/// (frame, class) pair; the unit at which predictions are made.
struct ClassFrame {
    int frame = 0;
    int class_id = 0;
    auto operator<=>(const ClassFrame&) const = default;
};

struct FrameKey {
    int frame = 0;
    int class_id = 0;
    int track_id = 0;
    auto operator<=>(const FrameKey&) const = default;

    TrackKey track() const { return {class_id, track_id}; }
    ClassFrame class_frame() const { return {frame, class_id}; }
};

/// Class-labelled unit DOAs per label frame, for ground truth or estimates.
class TrajectorySet {
public:
    TrajectorySet() = default;
    TrajectorySet(int frame_count, int class_count);

    /// Throws DataError for out-of-range frame/class or a duplicate key.
    void insert(const FrameKey& key, const UnitDirection& dir);

    const std::map<FrameKey, UnitDirection>& entries() const { return entries_; }
    std::optional<UnitDirection> find(const FrameKey& key) const;
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    int frame_count() const { return frame_count_; }
    int class_count() const { return class_count_; }
    void set_frame_count(int n);
    void set_class_count(int n);

    /// Active frames of every track, ascending.
    std::map<TrackKey, std::vector<int>> track_frames() const;
    /// Number of simultaneously active tracks per (frame, class).
    std::map<ClassFrame, int> class_activity() const;

private:
    std::map<FrameKey, UnitDirection> entries_;
    int frame_count_ = 0;
    int class_count_ = 0;
};

using DerivativeLabels = std::map<FrameKey, Vec3>;

/// True when `frame` opens a new segment: no earlier activity, or at least
/// `gap_frames` consecutive inactive frames since `previous_active`.
inline bool starts_segment(std::optional<int> previous_active, int frame, int gap_frames) {
    return !previous_active || frame - *previous_active - 1 >= gap_frames;
}

/// Derivative targets y_N - y_P, P the previous active frame of the same
/// track. Zero at segment starts (first appearance, or reappearance after
/// `gap_frames` or more inactive frames).
DerivativeLabels derivative_ground_truth(const TrajectorySet& truth,
                                         int gap_frames = kDefaultGapFrames);

enum class Motion { Static, Moving };

const char* to_string(Motion m);

/// A track is static when every pair of its DOAs is closer than
/// `threshold_deg` in angular distance.
std::map<TrackKey, Motion> classify_static_moving(
    const TrajectorySet& truth, double threshold_deg = kDefaultStaticThresholdDeg);

/// Regression target for one (frame, class).
struct Target {
    Vec3 doa;
    Vec3 derivative;
    int track_id = 0;
    int active_tracks = 1;  ///< tracks of this class active in this frame
};

/// One target per active (frame, class). With several same-class tracks the
/// lowest track id is chosen; `active_tracks` records the overlap.
std::map<ClassFrame, Target> select_targets(const TrajectorySet& truth,
                                            const DerivativeLabels& derivatives);

}  // namespace salsaloc
