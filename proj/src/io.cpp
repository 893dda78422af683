#include "salsaloc/io.hpp"
#include "salsaloc/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace salsaloc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class LineParser {
public:
    LineParser(const std::string& source, int line, std::vector<std::string> fields)
        : source_(source), line_(line), fields_(std::move(fields)) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw DataError(source_ + ":" + std::to_string(line_) + ": " + what);
    }

    void expect_columns(std::size_t n) const {
        if (fields_.size() != n)
            fail("expected " + std::to_string(n) + " columns, found " + std::to_string(fields_.size()));
    }

    int integer(std::size_t i) const {
        const auto& s = fields_[i];
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty())
            fail("column " + std::to_string(i + 1) + ": '" + s + "' is not an integer");
        return v;
    }

    double real(std::size_t i) const {
        const auto& s = fields_[i];
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(v))
            fail("column " + std::to_string(i + 1) + ": '" + s + "' is not a finite number");
        return v;
    }

private:
    const std::string& source_;
    int line_;
    std::vector<std::string> fields_;
};

/// Calls fn(parser) for every non-comment, non-blank line.
template <typename Fn>
void for_each_row(const std::string& text, const std::string& source, Fn&& fn) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        fn(LineParser(source, number, split_csv_line(t)), t);
    }
}

struct Angles {
    double az, el;
};

Angles parse_angles(const LineParser& p, std::size_t az_col) {
    const double az = p.real(az_col), el = p.real(az_col + 1);
    if (!(az >= -180.0 && az < 180.0)) p.fail("azimuth " + fmt::format("{}", az) + " outside [-180, 180)");
    if (!(el >= -90.0 && el <= 90.0)) p.fail("elevation " + fmt::format("{}", el) + " outside [-90, 90]");
    return {az, el};
}

void put_comments(std::string& out, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out += "# " + c + "\n";
}

/// Rounds to 6 decimals and folds 180 back into [-180, 180).
double azimuth_for_file(const UnitDirection& d) {
    double az = std::round(d.azimuth_deg() * 1e6) / 1e6;
    if (az >= 180.0) az -= 360.0;
    return az;
}

void put_angles(std::string& out, const UnitDirection& d) {
    out += fmt::format("{:.6f},{:.6f}", azimuth_for_file(d), d.elevation_deg());
}

/// Extent from an optional "# frames=N classes=C" comment.
struct Extent {
    int frames = 0, classes = 0;
};

Extent declared_extent(const std::string& text) {
    std::istringstream scan(text);
    for (std::string line; std::getline(scan, line);) {
        int f = 0, c = 0;
        if (std::sscanf(line.c_str(), "# frames=%d classes=%d", &f, &c) == 2 && f >= 0 && c >= 0) return {f, c};
    }
    return {};
}

/// Widens to the declared extent; rows past it are an error.
void apply_extent(const Extent& declared, int& frames, int& classes, const std::string& source) {
    if ((declared.frames && frames > declared.frames) || (declared.classes && classes > declared.classes))
        throw DataError(source + ": rows exceed the declared frames/classes");
    frames = std::max(frames, declared.frames);
    classes = std::max(classes, declared.classes);
}

void put_extent(std::string& out, int frames, int classes) {
    out += fmt::format("# frames={} classes={}\n", frames, classes);
}

std::string vec_fields(const Vec3& v) { return fmt::format("{:.9f},{:.9f},{:.9f}", v.x(), v.y(), v.z()); }

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

TrajectorySet parse_metadata(const std::string& text, const std::string& source) {
    std::vector<std::pair<FrameKey, UnitDirection>> rows;
    int frames = 0, classes = 0;
    std::map<FrameKey, bool> seen;
    for_each_row(text, source, [&](const LineParser& p, const std::string&) {
        p.expect_columns(5);
        FrameKey key{p.integer(0), p.integer(1), p.integer(2)};
        if (key.frame < 0 || key.class_id < 0 || key.track_id < 0) p.fail("negative frame, class or track");
        const auto a = parse_angles(p, 3);
        if (!seen.emplace(key, true).second) p.fail("duplicate (frame, class, track) row");
        rows.emplace_back(key, UnitDirection::from_angles(a.az, a.el));
        frames = std::max(frames, key.frame + 1);
        classes = std::max(classes, key.class_id + 1);
    });
    apply_extent(declared_extent(text), frames, classes, source);
    TrajectorySet out(frames, classes);
    for (const auto& [k, d] : rows) out.insert(k, d);
    return out;
}

TrajectorySet ingest_metadata(const std::filesystem::path& path) {
    return parse_metadata(read_text_file(path), path.string());
}

std::string format_metadata(const TrajectorySet& set, const std::vector<std::string>& comments) {
    std::string out;
    put_comments(out, comments);
    put_extent(out, set.frame_count(), set.class_count());
    for (const auto& [k, d] : set.entries()) {
        out += fmt::format("{},{},{},", k.frame, k.class_id, k.track_id);
        put_angles(out, d);
        out += "\n";
    }
    return out;
}

std::string format_derivatives(const TrajectorySet& truth, const DerivativeLabels& derivatives,
                               const std::vector<std::string>& comments) {
    std::string out;
    put_comments(out, comments);
    put_extent(out, truth.frame_count(), truth.class_count());
    for (const auto& [k, d] : truth.entries()) {
        auto it = derivatives.find(k);
        if (it == derivatives.end()) throw DataError("format_derivatives: missing derivative label");
        out += fmt::format("{},{},{},", k.frame, k.class_id, k.track_id);
        put_angles(out, d);
        out += "," + vec_fields(it->second) + "\n";
    }
    return out;
}

std::pair<TrajectorySet, DerivativeLabels> parse_derivatives(const std::string& text,
                                                             const std::string& source) {
    std::vector<std::pair<FrameKey, UnitDirection>> rows;
    DerivativeLabels derivs;
    int frames = 0, classes = 0;
    for_each_row(text, source, [&](const LineParser& p, const std::string&) {
        p.expect_columns(8);
        FrameKey key{p.integer(0), p.integer(1), p.integer(2)};
        if (key.frame < 0 || key.class_id < 0 || key.track_id < 0) p.fail("negative frame, class or track");
        const auto a = parse_angles(p, 3);
        if (!derivs.emplace(key, Vec3(p.real(5), p.real(6), p.real(7))).second)
            p.fail("duplicate (frame, class, track) row");
        rows.emplace_back(key, UnitDirection::from_angles(a.az, a.el));
        frames = std::max(frames, key.frame + 1);
        classes = std::max(classes, key.class_id + 1);
    });
    apply_extent(declared_extent(text), frames, classes, source);
    TrajectorySet truth(frames, classes);
    for (const auto& [k, d] : rows) truth.insert(k, d);
    return {std::move(truth), std::move(derivs)};
}

std::string format_predictions(const PredictorOutput& preds, const std::vector<std::string>& comments) {
    std::string out;
    put_comments(out, comments);
    put_extent(out, preds.frame_count, preds.class_count);
    out += std::string(kPredictionHeader) + "\n";
    for (const auto& [k, p] : preds.entries)
        out += fmt::format("{},{},{},{}\n", k.frame, k.class_id, vec_fields(p.doa), vec_fields(p.derivative));
    return out;
}

PredictorOutput parse_predictions(const std::string& text, const std::string& source) {
    PredictorOutput out;
    bool header = false;
    for_each_row(text, source, [&](const LineParser& p, const std::string& line) {
        if (!header) {
            if (line != kPredictionHeader) p.fail(std::string("expected header '") + kPredictionHeader + "'");
            header = true;
            return;
        }
        p.expect_columns(8);
        ClassFrame key{p.integer(0), p.integer(1)};
        if (key.frame < 0 || key.class_id < 0) p.fail("negative frame or class");
        Prediction pr{Vec3(p.real(2), p.real(3), p.real(4)), Vec3(p.real(5), p.real(6), p.real(7))};
        if (!out.entries.emplace(key, pr).second) p.fail("duplicate (frame, class) row");
        out.frame_count = std::max(out.frame_count, key.frame + 1);
        out.class_count = std::max(out.class_count, key.class_id + 1);
    });
    if (!header) throw DataError(source + ": missing prediction header");
    apply_extent(declared_extent(text), out.frame_count, out.class_count, source);
    return out;
}

std::string format_trajectory_report(const std::vector<FusionRow>& rows,
                                     const std::vector<std::string>& comments) {
    std::string out;
    put_comments(out, comments);
    out += std::string(kTrajectoryHeader) + "\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.9f}\n", r.frame, r.class_id, vec_fields(r.raw),
                           vec_fields(r.fused), vec_fields(r.truth), r.raw_error_deg, r.fused_error_deg,
                           r.derivative_norm);
    return out;
}

std::string format_report_csv(const EvalReport& r, const std::vector<std::string>& comments) {
    std::string out;
    put_comments(out, comments);
    out += "section,key,value\n";
    out += fmt::format("summary,threshold_deg,{:.3f}\n", r.threshold_deg);
    out += fmt::format("summary,recordings,{}\n", r.recordings);
    out += fmt::format("summary,TPs,{}\nsummary,TPm,{}\nsummary,FNs,{}\nsummary,FNm,{}\n", r.tp_static,
                       r.tp_moving, r.fn_static, r.fn_moving);
    out += fmt::format("summary,Pds,{}\nsummary,Pdm,{}\n", format_pd(r.pd_static), format_pd(r.pd_moving));
    out += fmt::format("summary,sources_TPs,{}\nsummary,sources_TPm,{}\n", r.sources_tp_static,
                       r.sources_tp_moving);
    out += fmt::format("summary,sources_FNs,{}\nsummary,sources_FNm,{}\n", r.sources_fn_static,
                       r.sources_fn_moving);
    out += fmt::format("summary,excluded_frames,{}\n", r.excluded_frames);
    for (const auto& [cls, s] : r.classwise) {
        const auto mae = s.mae();
        out += fmt::format("class_mae,{},{}\n", cls, mae ? fmt::format("{:.3f}", *mae) : "NOT_DETECTED");
    }
    out += "\nclass,track,motion,frames,frames_within,mean_error_deg,localized\n";
    for (const auto& s : r.sources)
        out += fmt::format("{},{},{},{},{},{:.6f},{}\n", s.track.class_id, s.track.track_id,
                           to_string(s.motion), s.frames, s.frames_within, s.mean_error_deg,
                           s.localized ? 1 : 0);
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw DataError("write failed for " + path.string());
}

}  // namespace salsaloc
