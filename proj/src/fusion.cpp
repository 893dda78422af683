#include "salsaloc/fusion.hpp"
#include "salsaloc/errors.hpp"
#include "salsaloc/metrics.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace salsaloc {

std::map<ClassFrame, Vec3> fuse_unnormalized(const PredictorOutput& preds, const FusionConfig& config) {
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0))
        throw std::invalid_argument("fuse: alpha must be in [0, 1]");

    std::map<ClassFrame, Vec3> out;
    std::map<int, std::optional<int>> last_frame;  // per class
    std::map<int, Vec3> prev;                      // per class, raw or fused
    // Entries are ordered by frame, so each class stream is visited in time order.
    for (const auto& [key, p] : preds.entries) {
        auto& last = last_frame[key.class_id];
        Vec3 fused;
        if (starts_segment(last, key.frame, config.gap_frames)) {
            fused = p.doa;
        } else {
            fused = config.alpha * p.doa + (1.0 - config.alpha) * (prev.at(key.class_id) + p.derivative);
        }
        prev[key.class_id] = config.recursive ? fused : p.doa;
        last = key.frame;
        out.emplace(key, fused);
    }
    return out;
}

TrajectorySet fuse(const PredictorOutput& preds, const FusionConfig& config) {
    TrajectorySet out(preds.frame_count, preds.class_count);
    for (const auto& [key, v] : fuse_unnormalized(preds, config)) {
        if (!(v.norm() > 0.0) || !v.allFinite())
            throw NumericError("fuse: zero or non-finite fused vector at frame " +
                               std::to_string(key.frame) + ", class " + std::to_string(key.class_id));
        out.insert({key.frame, key.class_id, 0}, UnitDirection::normalized(v));
    }
    return out;
}

TrajectorySet raw_trajectories(const PredictorOutput& preds) {
    return fuse(preds, FusionConfig{1.0, false, kDefaultGapFrames});
}

std::vector<FusionRow> fuse_report(const PredictorOutput& raw, const TrajectorySet& fused,
                                   const TrajectorySet& truth) {
    std::map<ClassFrame, Vec3> fused_by_key;
    for (const auto& [k, d] : fused.entries())
        if (!fused_by_key.emplace(k.class_frame(), d.vec()).second)
            throw DataError("fuse_report: fused set has several tracks for one class at frame " +
                            std::to_string(k.frame));
    if (fused_by_key.size() != raw.entries.size())
        throw DataError("fuse_report: raw and fused streams are not aligned");
    std::map<ClassFrame, Vec3> truth_by_key;
    for (const auto& [k, d] : truth.entries()) truth_by_key.try_emplace(k.class_frame(), d.vec());

    std::vector<FusionRow> rows;
    for (const auto& [key, p] : raw.entries) {
        auto f = fused_by_key.find(key);
        if (f == fused_by_key.end())
            throw DataError("fuse_report: no fused estimate at frame " + std::to_string(key.frame) +
                            ", class " + std::to_string(key.class_id));
        auto t = truth_by_key.find(key);
        if (t == truth_by_key.end())
            throw DataError("fuse_report: no truth at frame " + std::to_string(key.frame) +
                            ", class " + std::to_string(key.class_id));
        FusionRow row;
        row.frame = key.frame;
        row.class_id = key.class_id;
        row.raw = p.doa;
        row.fused = f->second;
        row.truth = t->second;
        row.raw_error_deg = doa_error(row.truth, row.raw);
        row.fused_error_deg = doa_error(row.truth, row.fused);
        row.derivative_norm = p.derivative.norm();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace salsaloc
