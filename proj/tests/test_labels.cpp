#include "support.hpp"

#include "salsaloc/errors.hpp"
#include "salsaloc/labels.hpp"

#include <doctest.h>

#include <set>

using namespace salsaloc;
using testing::add_track;

namespace {

/// Gap rule written as a window scan: the derivative is zeroed when none of
/// the `gap` frames before N carry the track.
DerivativeLabels brute_force(const TrajectorySet& truth, int gap) {
    DerivativeLabels out;
    for (const auto& [k, d] : truth.entries()) {
        bool recent = false;
        for (int f = k.frame - gap; f < k.frame; ++f)
            if (f >= 0 && truth.find({f, k.class_id, k.track_id})) recent = true;
        if (!recent) {
            out[k] = Vec3::Zero();
            continue;
        }
        int p = k.frame - 1;
        while (!truth.find({p, k.class_id, k.track_id})) --p;
        out[k] = d.vec() - truth.find({p, k.class_id, k.track_id})->vec();
    }
    return out;
}

TrajectorySet gapped_track(int first_end, int second_start, int second_end) {
    TrajectorySet t(second_end + 1, 1);
    add_track(t, 0, 0, 0, first_end + 1, 10.0, 5.0, 2.0);
    add_track(t, 0, 0, second_start, second_end - second_start + 1, 50.0, -5.0, -1.5);
    return t;
}

}  // namespace

TEST_CASE("static source has zero derivatives") {
    TrajectorySet t(100, 1);
    add_track(t, 0, 0, 0, 100, 25.0, 10.0, 0.0);
    const auto d = derivative_ground_truth(t);
    REQUIRE(d.size() == 100);
    for (const auto& [k, v] : d) CHECK(v.norm() < 1e-12);
    CHECK(d.at({0, 0, 0}) == Vec3::Zero());
}

TEST_CASE("reappearance after 30 silent frames restarts the derivative") {
    const auto t = gapped_track(10, 41, 60);
    const auto d = derivative_ground_truth(t);
    CHECK(d.at({41, 0, 0}) == Vec3::Zero());
    CHECK(d.at({42, 0, 0}).norm() > 0.0);
}

TEST_CASE("reappearance after 5 silent frames differences to the last active frame") {
    const auto t = gapped_track(10, 16, 30);
    const auto d = derivative_ground_truth(t);
    const Vec3 want = t.find({16, 0, 0})->vec() - t.find({10, 0, 0})->vec();
    CHECK((d.at({16, 0, 0}) - want).norm() < 1e-15);
    CHECK(d == brute_force(t, 20));
}

TEST_CASE("gap boundary: 19 silent frames continue, 20 restart") {
    // active 0..10; 19 silent frames 11..29; active at 30
    const auto t19 = gapped_track(10, 30, 40);
    CHECK(derivative_ground_truth(t19).at({30, 0, 0}).norm() > 0.0);
    // 20 silent frames 11..30; active at 31
    const auto t20 = gapped_track(10, 31, 40);
    CHECK(derivative_ground_truth(t20).at({31, 0, 0}) == Vec3::Zero());
    CHECK(!starts_segment(10, 30, 20));
    CHECK(starts_segment(10, 31, 20));
    CHECK(starts_segment(std::nullopt, 0, 20));
}

TEST_CASE("derivatives match a brute-force window scan on random activity") {
    Rng rng(11);
    std::bernoulli_distribution on(0.7);
    for (int trial = 0; trial < 20; ++trial) {
        TrajectorySet t(300, 3);
        for (int c = 0; c < 3; ++c) {
            bool active = false;
            for (int f = 0; f < 300; ++f) {
                if (f % 7 == 0) active = on(rng) ? !active : active;
                if (f % 23 == 0 && on(rng)) active = false;
                if (active)
                    t.insert({f, c, 0}, UnitDirection::normalized(testing::random_unit(rng) + Vec3(3, 0, 0)));
            }
        }
        for (int gap : {1, 5, 20}) {
            const auto got = derivative_ground_truth(t, gap);
            const auto want = brute_force(t, gap);
            REQUIRE(got.size() == want.size());
            for (const auto& [k, v] : want) CHECK((got.at(k) - v).norm() < 1e-15);
        }
    }
}

TEST_CASE("cumulative sums of derivatives rebuild each segment") {
    TrajectorySet t(400, 2);
    add_track(t, 0, 0, 0, 80, -170.0, 20.0, 3.0);
    add_track(t, 0, 0, 120, 100, 30.0, -10.0, -2.0);
    add_track(t, 1, 0, 10, 250, 90.0, 40.0, 0.7);
    add_track(t, 1, 1, 300, 50, -20.0, 0.0, 0.0);
    const auto d = derivative_ground_truth(t);
    int starts = 0, zeros = 0;
    for (const auto& [track, frames] : t.track_frames()) {
        std::optional<int> prev;
        Vec3 acc = Vec3::Zero();
        for (int f : frames) {
            const FrameKey key{f, track.class_id, track.track_id};
            const Vec3 y = t.find(key)->vec();
            if (starts_segment(prev, f, 20)) {
                ++starts;
                acc = y;
            } else {
                acc += d.at(key);
            }
            CHECK((acc - y).norm() < 1e-9);
            prev = f;
        }
    }
    for (const auto& [k, v] : d) zeros += v == Vec3::Zero();
    CHECK(starts == 4);
    CHECK(zeros == starts + 50 - 1);  // the static track is zero throughout
}

TEST_CASE("static and moving classification") {
    TrajectorySet t(200, 4);
    add_track(t, 0, 0, 0, 50, 10.0, 0.0, 0.0);          // constant
    add_track(t, 1, 0, 0, 31, 10.0, 0.0, 1.0);          // 30 degree sweep
    Rng rng(13);
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    for (int f = 0; f < 100; ++f)                         // within 0.5 degrees
        t.insert({f, 2, 0}, UnitDirection::from_angles(-40.0 + jitter(rng), 15.0 + jitter(rng)));
    add_track(t, 3, 0, 0, 3, 0.0, 0.0, 0.6);             // 1.2 degrees end to end
    const auto m = classify_static_moving(t);
    CHECK(m.at({0, 0}) == Motion::Static);
    CHECK(m.at({1, 0}) == Motion::Moving);
    CHECK(m.at({2, 0}) == Motion::Static);
    CHECK(m.at({3, 0}) == Motion::Moving);
}

TEST_CASE("trajectory set bookkeeping") {
    TrajectorySet t(10, 2);
    t.insert({0, 1, 0}, UnitDirection());
    CHECK_THROWS_AS(t.insert({0, 1, 0}, UnitDirection()), DataError);
    CHECK_THROWS_AS(t.insert({10, 1, 0}, UnitDirection()), DataError);
    CHECK_THROWS_AS(t.insert({0, 2, 0}, UnitDirection()), DataError);
    t.insert({0, 1, 3}, UnitDirection::from_angles(90, 0));
    CHECK(t.class_activity().at({0, 1}) == 2);
    const auto targets = select_targets(t, derivative_ground_truth(t));
    CHECK(targets.at({0, 1}).track_id == 0);
    CHECK(targets.at({0, 1}).active_tracks == 2);
}
