#pragma once

// Far-field microphone array model.
//
// Coordinate convention: x points to the front, y to the left, z up.
// Azimuth is measured counter-clockwise from +x in the horizontal plane,
// elevation upward from that plane. Both are in degrees at API boundaries.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <complex>
#include <cstddef>
#include <vector>

namespace salsaloc {

using Vec3 = Eigen::Vector3d;

inline constexpr double kDefaultSpeedOfSound = 343.0;
inline constexpr double kDefaultTetraRadius = 0.042;

/// A direction of arrival: unit vector pointing from the array towards
/// the source.
class UnitDirection {
public:
    UnitDirection() : v_(1.0, 0.0, 0.0) {}

    /// Throws std::invalid_argument unless |v| = 1 within 1e-9.
    explicit UnitDirection(const Vec3& v);

    /// Normalizes `v`; throws std::invalid_argument for zero or non-finite input.
    static UnitDirection normalized(const Vec3& v);

    /// x = cos(el)cos(az), y = cos(el)sin(az), z = sin(el).
    static UnitDirection from_angles(double azimuth_deg, double elevation_deg);

    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }
    const Vec3& vec() const { return v_; }

    /// Azimuth in [-180, 180), degrees.
    double azimuth_deg() const;
    /// Elevation in [-90, 90], degrees.
    double elevation_deg() const;

private:
    Vec3 v_;
};

class ArrayGeometry {
public:
    ArrayGeometry(std::vector<Vec3> mic_positions, std::size_t reference_index = 0,
                  double speed_of_sound = kDefaultSpeedOfSound);

    /// Four capsules on a sphere of `radius` at (az, el) = (45, 35), (-45, -35),
    /// (135, -35), (-135, 35) degrees, the usual tetrahedral MIC layout.
    static ArrayGeometry tetrahedral(double radius = kDefaultTetraRadius,
                                     double speed_of_sound = kDefaultSpeedOfSound);

    std::size_t mic_count() const { return mics_.size(); }
    std::size_t reference_index() const { return reference_; }
    double speed_of_sound() const { return c_; }
    const std::vector<Vec3>& mic_positions() const { return mics_; }
    const Vec3& mic(std::size_t m) const { return mics_.at(m); }

    /// Indices of the non-reference microphones, in ascending order. Channel
    /// k of an rdoa/NIPD vector refers to mic `others()[k]`.
    std::vector<std::size_t> others() const;

    /// Largest pairwise microphone distance, meters.
    double aperture() const;

private:
    std::vector<Vec3> mics_;
    std::size_t reference_;
    double c_;
};

/// Relative distances of arrival (p_m - p_ref) . dir for every non-reference
/// mic, in `others()` order, meters. Positive when mic m is closer to the
/// source than the reference, i.e. mic m hears the wavefront first.
/// Throws std::invalid_argument if |dir| deviates from 1 by more than 1e-6.
std::vector<double> rdoa(const ArrayGeometry& geom, const Vec3& dir);
std::vector<double> rdoa(const ArrayGeometry& geom, const UnitDirection& dir);

/// exp(j 2 pi f d / c). With the e^{-j w t} analysis convention this is the
/// spectrum ratio X_m / X_ref of a plane wave with relative distance d.
std::complex<double> array_response(double frequency_hz, double rdoa_m,
                                    double speed_of_sound = kDefaultSpeedOfSound);

}  // namespace salsaloc
