#include "plot.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace salsaloc::cli {

namespace {

constexpr double kWidth = 900, kPanel = 220, kLeft = 60, kRight = 20, kTop = 40, kGap = 50;

struct Panel {
    double y0;         // top pixel
    double lo, hi;     // value range
    int frames;

    double x(double frame) const {
        return kLeft + (kWidth - kLeft - kRight) * frame / std::max(1, frames - 1);
    }
    double y(double v) const { return y0 + kPanel * (hi - v) / (hi - lo); }
};

void axes(std::string& s, const Panel& p, const char* label, double step) {
    s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                     "stroke=\"#444\"/>\n",
                     kLeft, p.y0, kWidth - kLeft - kRight, kPanel);
    for (double v = p.lo; v <= p.hi + 1e-9; v += step) {
        s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", kLeft,
                         p.y(v), kWidth - kRight, p.y(v));
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{:.0f}</text>\n",
                         kLeft - 4, p.y(v) + 3, v);
    }
    s += fmt::format("<text x=\"12\" y=\"{:.1f}\" font-size=\"12\" transform=\"rotate(-90 12 {:.1f})\" "
                     "text-anchor=\"middle\">{}</text>\n",
                     p.y0 + kPanel / 2, p.y0 + kPanel / 2, label);
}

void dots(std::string& s, const Panel& az, const Panel& el, const TrajectorySet& set, int class_id,
          const char* colour, double r) {
    for (const auto& [k, d] : set.entries()) {
        if (k.class_id != class_id) continue;
        s += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"{}\" fill=\"{}\"/>\n", az.x(k.frame),
                         az.y(d.azimuth_deg()), r, colour);
        s += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"{}\" fill=\"{}\"/>\n", el.x(k.frame),
                         el.y(std::clamp(d.elevation_deg(), el.lo, el.hi)), r, colour);
    }
}

}  // namespace

std::string class_svg(int class_id, const TrajectorySet& truth, const TrajectorySet* raw,
                      const TrajectorySet* fused) {
    int frames = truth.frame_count();
    if (raw) frames = std::max(frames, raw->frame_count());
    if (fused) frames = std::max(frames, fused->frame_count());
    const double height = kTop + 2 * kPanel + kGap + 40;
    Panel az{kTop, -180, 180, frames};
    Panel el{kTop + kPanel + kGap, -90, 90, frames};

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\">\n",
        kWidth, height);
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += fmt::format("<text x=\"{:.1f}\" y=\"22\" font-size=\"14\">class {}: truth (black), raw (red), "
                     "fused (blue)</text>\n",
                     kLeft, class_id);
    axes(s, az, "azimuth (deg)", 45);
    axes(s, el, "elevation (deg)", 30);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\" text-anchor=\"middle\">frame (0 .. {})"
                     "</text>\n",
                     (kWidth + kLeft) / 2, height - 10, frames - 1);
    dots(s, az, el, truth, class_id, "black", 2.5);
    if (raw) dots(s, az, el, *raw, class_id, "#d62728", 1.5);
    if (fused) dots(s, az, el, *fused, class_id, "#1f77b4", 1.5);
    s += "</svg>\n";
    return s;
}

std::string mae_svg(const EvalReport& raw, const EvalReport* fused, int class_count, double threshold_deg) {
    const double height = 360, plot_h = 260, top = 40;
    const double slot = (kWidth - kLeft - kRight) / std::max(1, class_count);
    const double bar = slot * (fused ? 0.35 : 0.6);
    const double ymax = threshold_deg;
    auto y = [&](double v) { return top + plot_h * (1.0 - std::min(v, ymax) / ymax); };

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\">\n",
        kWidth, height);
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += fmt::format("<text x=\"{:.1f}\" y=\"22\" font-size=\"14\">classwise MAE (deg): raw (red){}</text>\n", kLeft,
                     fused ? ", fused (blue)" : "");
    s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                     "stroke=\"#444\"/>\n",
                     kLeft, top, kWidth - kLeft - kRight, plot_h);
    for (int i = 0; i <= 4; ++i) {
        const double v = ymax * i / 4;
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{:.1f}</text>\n",
                         kLeft - 4, y(v) + 3, v);
    }

    auto draw = [&](const EvalReport& r, int c, double x, const char* colour) {
        auto it = r.classwise.find(c);
        std::optional<double> mae = it == r.classwise.end() ? std::nullopt : it->second.mae();
        if (!mae) {
            if (it == r.classwise.end()) return;  // class absent from this recording
            s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"9\" fill=\"{}\" text-anchor=\"middle\" "
                             "transform=\"rotate(-90 {:.1f} {:.1f})\">NOT_DETECTED</text>\n",
                             x + bar / 2, top + plot_h - 40, colour, x + bar / 2, top + plot_h - 40);
            return;
        }
        s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n", x,
                         y(*mae), bar, top + plot_h - y(*mae), colour);
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"9\" text-anchor=\"middle\">{:.1f}</text>\n",
                         x + bar / 2, y(*mae) - 3, *mae);
    };
    for (int c = 0; c < class_count; ++c) {
        const double x0 = kLeft + slot * c + slot * 0.1;
        draw(raw, c, x0, "#d62728");
        if (fused) draw(*fused, c, x0 + bar, "#1f77b4");
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                         kLeft + slot * (c + 0.5), top + plot_h + 16, c);
    }
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\" text-anchor=\"middle\">class</text>\n",
                     (kWidth + kLeft) / 2, height - 20);
    s += "</svg>\n";
    return s;
}

}  // namespace salsaloc::cli
