#pragma once

#include "salsaloc/geometry.hpp"
#include "salsaloc/labels.hpp"
#include "salsaloc/random.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

namespace testing {

using namespace salsaloc;

inline Vec3 random_unit(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v(n(rng), n(rng), n(rng));
    return v.normalized();
}

inline double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("salsaloc_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Track of `frames` frames starting at `onset`, azimuth moving by `speed`
/// degrees per frame.
inline void add_track(TrajectorySet& set, int class_id, int track_id, int onset, int frames, double az0,
                      double el, double speed) {
    for (int i = 0; i < frames; ++i) {
        double az = az0 + speed * i;
        az = std::fmod(az + 540.0, 360.0) - 180.0;
        set.insert({onset + i, class_id, track_id}, UnitDirection::from_angles(az, el));
    }
}

}  // namespace testing
