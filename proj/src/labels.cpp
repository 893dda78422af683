#include "salsaloc/labels.hpp"
#include "salsaloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace salsaloc {

TrajectorySet::TrajectorySet(int frame_count, int class_count)
    : frame_count_(frame_count), class_count_(class_count) {
    if (frame_count < 0 || class_count < 0)
        throw DataError("TrajectorySet: negative frame or class count");
}

void TrajectorySet::insert(const FrameKey& key, const UnitDirection& dir) {
    if (key.frame < 0 || key.frame >= frame_count_)
        throw DataError("TrajectorySet: frame " + std::to_string(key.frame) + " outside [0, " +
                        std::to_string(frame_count_) + ")");
    if (key.class_id < 0 || key.class_id >= class_count_)
        throw DataError("TrajectorySet: class " + std::to_string(key.class_id) + " outside [0, " +
                        std::to_string(class_count_) + ")");
    if (key.track_id < 0) throw DataError("TrajectorySet: negative track id");
    if (!entries_.emplace(key, dir).second)
        throw DataError("TrajectorySet: duplicate entry (frame " + std::to_string(key.frame) +
                        ", class " + std::to_string(key.class_id) + ", track " +
                        std::to_string(key.track_id) + ")");
}

std::optional<UnitDirection> TrajectorySet::find(const FrameKey& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void TrajectorySet::set_frame_count(int n) {
    if (!entries_.empty() && entries_.rbegin()->first.frame >= n) {
        int max_frame = 0;
        for (const auto& [k, _] : entries_) max_frame = std::max(max_frame, k.frame);
        if (max_frame >= n) throw DataError("TrajectorySet: frame count below existing entries");
    }
    frame_count_ = n;
}

void TrajectorySet::set_class_count(int n) {
    for (const auto& [k, _] : entries_)
        if (k.class_id >= n) throw DataError("TrajectorySet: class count below existing entries");
    class_count_ = n;
}

std::map<TrackKey, std::vector<int>> TrajectorySet::track_frames() const {
    std::map<TrackKey, std::vector<int>> out;
    for (const auto& [k, _] : entries_) out[k.track()].push_back(k.frame);
    for (auto& [_, frames] : out) std::sort(frames.begin(), frames.end());
    return out;
}

std::map<ClassFrame, int> TrajectorySet::class_activity() const {
    std::map<ClassFrame, int> out;
    for (const auto& [k, _] : entries_) ++out[k.class_frame()];
    return out;
}

DerivativeLabels derivative_ground_truth(const TrajectorySet& truth, int gap_frames) {
    DerivativeLabels out;
    for (const auto& [track, frames] : truth.track_frames()) {
        std::optional<int> prev;
        for (int n : frames) {
            const FrameKey key{n, track.class_id, track.track_id};
            if (starts_segment(prev, n, gap_frames)) {
                out.emplace(key, Vec3::Zero());
            } else {
                const Vec3& cur = truth.entries().at(key).vec();
                const Vec3& old = truth.entries().at({*prev, track.class_id, track.track_id}).vec();
                out.emplace(key, cur - old);
            }
            prev = n;
        }
    }
    return out;
}

const char* to_string(Motion m) { return m == Motion::Static ? "static" : "moving"; }

std::map<TrackKey, Motion> classify_static_moving(const TrajectorySet& truth,
                                                  double threshold_deg) {
    // Pairwise angle < threshold  <=>  dot > cos(threshold).
    const double min_dot = std::cos(threshold_deg * std::numbers::pi / 180.0);
    std::map<TrackKey, std::vector<Vec3>> dirs;
    for (const auto& [k, d] : truth.entries()) dirs[k.track()].push_back(d.vec());

    std::map<TrackKey, Motion> out;
    for (const auto& [track, v] : dirs) {
        Motion motion = Motion::Static;
        for (std::size_t i = 0; i < v.size() && motion == Motion::Static; ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j)
                if (std::clamp(v[i].dot(v[j]), -1.0, 1.0) <= min_dot) {
                    motion = Motion::Moving;
                    break;
                }
        out.emplace(track, motion);
    }
    return out;
}

std::map<ClassFrame, Target> select_targets(const TrajectorySet& truth,
                                            const DerivativeLabels& derivatives) {
    std::map<ClassFrame, Target> out;
    // Entries iterate by (frame, class, track): the first seen is the lowest track.
    for (const auto& [k, dir] : truth.entries()) {
        auto [it, fresh] = out.try_emplace(k.class_frame());
        if (!fresh) {
            ++it->second.active_tracks;
            continue;
        }
        auto d = derivatives.find(k);
        if (d == derivatives.end())
            throw DataError("select_targets: missing derivative label at frame " +
                            std::to_string(k.frame));
        it->second = Target{dir.vec(), d->second, k.track_id, 1};
    }
    return out;
}

}  // namespace salsaloc
