#include "salsaloc/metrics.hpp"
#include "salsaloc/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace salsaloc {

double doa_error(const Vec3& truth, const Vec3& pred) {
    const double nt = truth.norm(), np = pred.norm();
    if (!(nt > 0.0) || !(np > 0.0) || !std::isfinite(nt) || !std::isfinite(np))
        throw std::invalid_argument("doa_error: zero or non-finite vector");
    // atan2 form of arccos(n_t . n_p): same angle, but no loss of precision near 0 and 180.
    const Vec3 a = truth / nt, b = pred / np;
    return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

namespace {

std::optional<double> percent(long hit, long miss) {
    if (hit + miss == 0) return std::nullopt;
    return 100.0 * static_cast<double>(hit) / static_cast<double>(hit + miss);
}

}  // namespace

EvalReport evaluate(const TrajectorySet& pred, const TrajectorySet& truth,
                    const std::map<TrackKey, Motion>& motion, double threshold_deg) {
    if (pred.frame_count() > truth.frame_count())
        throw DataError("evaluate: predictions cover " + std::to_string(pred.frame_count()) +
                        " frames but truth only " + std::to_string(truth.frame_count()));

    std::map<ClassFrame, Vec3> estimate;
    for (const auto& [k, d] : pred.entries())
        if (!estimate.emplace(k.class_frame(), d.vec()).second)
            throw DataError("evaluate: several predictions for class " + std::to_string(k.class_id) +
                            " at frame " + std::to_string(k.frame));

    const auto activity = truth.class_activity();
    EvalReport report;
    report.threshold_deg = threshold_deg;

    struct Acc {
        std::vector<double> errors;
    };
    std::map<TrackKey, Acc> per_source;
    for (const auto& [k, d] : truth.entries()) {
        auto& acc = per_source[k.track()];
        if (activity.at(k.class_frame()) > 1) {
            ++report.excluded_frames;
            continue;
        }
        auto it = estimate.find(k.class_frame());
        if (it == estimate.end())
            throw DataError("evaluate: no prediction for class " + std::to_string(k.class_id) +
                            " at frame " + std::to_string(k.frame));
        acc.errors.push_back(doa_error(d.vec(), it->second));
    }

    for (const auto& [track, acc] : per_source) {
        if (acc.errors.empty()) continue;
        auto m = motion.find(track);
        if (m == motion.end())
            throw DataError("evaluate: no static/moving label for class " +
                            std::to_string(track.class_id) + ", track " + std::to_string(track.track_id));
        SourceResult src;
        src.track = track;
        src.motion = m->second;
        src.frames = static_cast<long>(acc.errors.size());
        double sum = 0.0;
        for (double e : acc.errors) {
            sum += e;
            if (e < threshold_deg) ++src.frames_within;
        }
        src.mean_error_deg = sum / static_cast<double>(src.frames);
        src.localized = src.mean_error_deg < threshold_deg;

        const bool is_static = src.motion == Motion::Static;
        const long miss = src.frames - src.frames_within;
        (is_static ? report.tp_static : report.tp_moving) += src.frames_within;
        (is_static ? report.fn_static : report.fn_moving) += miss;
        if (src.localized)
            ++(is_static ? report.sources_tp_static : report.sources_tp_moving);
        else
            ++(is_static ? report.sources_fn_static : report.sources_fn_moving);

        auto& cls = report.classwise[track.class_id];
        if (src.localized) {
            cls.error_sum_deg += sum;
            cls.frames += src.frames;
        }
        report.sources.push_back(src);
    }
    report.pd_static = percent(report.tp_static, report.fn_static);
    report.pd_moving = percent(report.tp_moving, report.fn_moving);
    return report;
}

EvalReport aggregate(std::span<const EvalReport> reports, PdMode mode) {
    EvalReport out;
    out.recordings = 0;
    if (reports.empty()) return out;
    out.threshold_deg = reports.front().threshold_deg;
    double pds_sum = 0.0, pdm_sum = 0.0;
    int pds_n = 0, pdm_n = 0;
    for (const auto& r : reports) {
        out.tp_static += r.tp_static;
        out.tp_moving += r.tp_moving;
        out.fn_static += r.fn_static;
        out.fn_moving += r.fn_moving;
        out.sources_tp_static += r.sources_tp_static;
        out.sources_tp_moving += r.sources_tp_moving;
        out.sources_fn_static += r.sources_fn_static;
        out.sources_fn_moving += r.sources_fn_moving;
        out.excluded_frames += r.excluded_frames;
        out.recordings += r.recordings;
        for (const auto& [cls, s] : r.classwise) {
            auto& dst = out.classwise[cls];
            dst.error_sum_deg += s.error_sum_deg;
            dst.frames += s.frames;
        }
        out.sources.insert(out.sources.end(), r.sources.begin(), r.sources.end());
        if (r.pd_static) pds_sum += *r.pd_static, ++pds_n;
        if (r.pd_moving) pdm_sum += *r.pd_moving, ++pdm_n;
    }
    if (mode == PdMode::Pooled) {
        out.pd_static = percent(out.tp_static, out.fn_static);
        out.pd_moving = percent(out.tp_moving, out.fn_moving);
    } else {
        if (pds_n > 0) out.pd_static = pds_sum / pds_n;
        if (pdm_n > 0) out.pd_moving = pdm_sum / pdm_n;
    }
    return out;
}

std::string format_pd(const std::optional<double>& pd) {
    return pd ? fmt::format("{:.1f}", *pd) : std::string("NA");
}

std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows,
                         const std::string& condition) {
    std::string out = fmt::format("{:<8} {:<10} {:>8} {:>8} {:>8} {:>8} {:>6} {:>6}\n", "SNR",
                                  "Model", "TPs", "TPm", "FNs", "FNm", "Pds", "Pdm");
    for (const auto& [label, r] : rows)
        out += fmt::format("{:<8} {:<10} {:>8} {:>8} {:>8} {:>8} {:>6} {:>6}\n", condition, label,
                           r.tp_static, r.tp_moving, r.fn_static, r.fn_moving,
                           format_pd(r.pd_static), format_pd(r.pd_moving));
    return out;
}

}  // namespace salsaloc
