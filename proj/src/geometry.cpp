#include "salsaloc/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace salsaloc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

UnitDirection::UnitDirection(const Vec3& v) : v_(v) {
    if (!finite(v) || std::abs(v.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("UnitDirection: vector is not unit norm");
}

UnitDirection UnitDirection::normalized(const Vec3& v) {
    const double n = v.norm();
    if (!std::isfinite(n) || n == 0.0)
        throw std::invalid_argument("UnitDirection: cannot normalize zero or non-finite vector");
    return UnitDirection(Vec3(v / n));
}

UnitDirection UnitDirection::from_angles(double azimuth_deg, double elevation_deg) {
    if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg))
        throw std::invalid_argument("UnitDirection: non-finite angle");
    const double az = azimuth_deg * kDeg;
    const double el = elevation_deg * kDeg;
    return normalized(Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)));
}

double UnitDirection::azimuth_deg() const {
    double az = std::atan2(v_.y(), v_.x()) / kDeg;
    if (az >= 180.0) az -= 360.0;
    return az;
}

double UnitDirection::elevation_deg() const {
    const double horiz = std::hypot(v_.x(), v_.y());
    return std::atan2(v_.z(), horiz) / kDeg;
}

ArrayGeometry::ArrayGeometry(std::vector<Vec3> mic_positions, std::size_t reference_index,
                             double speed_of_sound)
    : mics_(std::move(mic_positions)), reference_(reference_index), c_(speed_of_sound) {
    if (mics_.size() < 2)
        throw std::invalid_argument("ArrayGeometry: at least 2 microphones required");
    if (reference_ >= mics_.size())
        throw std::invalid_argument("ArrayGeometry: reference_index out of range");
    if (!(c_ > 0.0) || !std::isfinite(c_))
        throw std::invalid_argument("ArrayGeometry: speed_of_sound must be positive");
    for (std::size_t i = 0; i < mics_.size(); ++i) {
        if (!finite(mics_[i]))
            throw std::invalid_argument("ArrayGeometry: mic " + std::to_string(i) +
                                        " position not finite");
        for (std::size_t j = 0; j < i; ++j)
            if (mics_[i] == mics_[j])
                throw std::invalid_argument("ArrayGeometry: mics " + std::to_string(j) + " and " +
                                            std::to_string(i) + " coincide");
    }
}

ArrayGeometry ArrayGeometry::tetrahedral(double radius, double speed_of_sound) {
    if (!(radius > 0.0)) throw std::invalid_argument("ArrayGeometry: radius must be positive");
    const double angles[4][2] = {{45.0, 35.0}, {-45.0, -35.0}, {135.0, -35.0}, {-135.0, 35.0}};
    std::vector<Vec3> mics;
    for (const auto& a : angles) mics.push_back(radius * UnitDirection::from_angles(a[0], a[1]).vec());
    return ArrayGeometry(std::move(mics), 0, speed_of_sound);
}

std::vector<std::size_t> ArrayGeometry::others() const {
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < mics_.size(); ++m)
        if (m != reference_) out.push_back(m);
    return out;
}

double ArrayGeometry::aperture() const {
    double best = 0.0;
    for (std::size_t i = 0; i < mics_.size(); ++i)
        for (std::size_t j = i + 1; j < mics_.size(); ++j)
            best = std::max(best, (mics_[i] - mics_[j]).norm());
    return best;
}

std::vector<double> rdoa(const ArrayGeometry& geom, const Vec3& dir) {
    if (!finite(dir) || std::abs(dir.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("rdoa: direction is not unit norm");
    const Vec3& ref = geom.mic(geom.reference_index());
    std::vector<double> out;
    out.reserve(geom.mic_count() - 1);
    for (std::size_t m : geom.others()) out.push_back((geom.mic(m) - ref).dot(dir));
    return out;
}

std::vector<double> rdoa(const ArrayGeometry& geom, const UnitDirection& dir) {
    return rdoa(geom, dir.vec());
}

std::complex<double> array_response(double frequency_hz, double rdoa_m, double speed_of_sound) {
    const double phase = 2.0 * std::numbers::pi * frequency_hz * rdoa_m / speed_of_sound;
    return std::polar(1.0, phase);
}

}  // namespace salsaloc
