#include "support.hpp"

#include "salsaloc/errors.hpp"
#include "salsaloc/metrics.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

using namespace salsaloc;
using testing::add_track;

namespace {

/// `v` turned by `deg` degrees about an axis orthogonal to it.
Vec3 tilt(const Vec3& v, double deg, Rng& rng) {
    const Vec3 axis = v.cross(testing::random_unit(rng)).normalized();
    return Eigen::AngleAxisd(testing::rad(deg), axis) * v;
}

}  // namespace

TEST_CASE("angular error of identical, orthogonal and opposite vectors") {
    CHECK(std::abs(doa_error(Vec3(0, 0, 1), Vec3(0, 0, 1))) < 1e-9);
    CHECK(std::abs(doa_error(Vec3(1, 0, 0), Vec3(0, 1, 0)) - 90.0) < 1e-9);
    CHECK(std::abs(doa_error(Vec3(1, 0, 0), Vec3(-1, 0, 0)) - 180.0) < 1e-9);
    CHECK(std::abs(doa_error(Vec3(1, 0, 0), Vec3(0, 5, 0)) - 90.0) < 1e-9);  // prediction normalized first
    CHECK_THROWS_AS(doa_error(Vec3(1, 0, 0), Vec3::Zero()), std::invalid_argument);
}

TEST_CASE("angular error is symmetric and rotation invariant") {
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 a = testing::random_unit(rng), b = testing::random_unit(rng);
        const Eigen::Matrix3d R =
            Eigen::AngleAxisd(std::uniform_real_distribution<double>(0, 6.28)(rng), testing::random_unit(rng))
                .toRotationMatrix();
        const double e = doa_error(a, b);
        CHECK(e >= 0.0);
        CHECK(e <= 180.0);
        CHECK(std::abs(doa_error(b, a) - e) < 1e-9);
        CHECK(std::abs(doa_error(R * a, R * b) - e) < 1e-9);
    }
}

TEST_CASE("perfect predictions score 100 percent") {
    TrajectorySet truth(100, 3);
    add_track(truth, 0, 0, 0, 60, 10, 0, 0);
    add_track(truth, 1, 0, 20, 70, -50, 20, 1.5);
    const auto r = evaluate(truth, truth, classify_static_moving(truth));
    CHECK(*r.pd_static == 100.0);
    CHECK(*r.pd_moving == 100.0);
    CHECK(r.fn_static + r.fn_moving == 0);
    CHECK(r.tp_static == 60);
    CHECK(r.tp_moving == 70);
    for (const auto& [c, s] : r.classwise) CHECK(*s.mae() < 1e-6);
}

TEST_CASE("a static source 25 degrees off is a miss on every frame") {
    Rng rng(32);
    TrajectorySet truth(50, 1), pred(50, 1);
    add_track(truth, 0, 0, 0, 50, 40, 10, 0);
    for (const auto& [k, d] : truth.entries()) pred.insert(k, UnitDirection::normalized(tilt(d.vec(), 25, rng)));
    const auto r = evaluate(pred, truth, classify_static_moving(truth));
    CHECK(r.fn_static == 50);
    CHECK(r.tp_static == 0);
    CHECK(*r.pd_static == 0.0);
    CHECK(!r.pd_moving);
    CHECK(r.sources_fn_static == 1);
    CHECK(!r.classwise.at(0).mae());
}

TEST_CASE("15 degree average: detected source with 75 percent of frames under threshold") {
    Rng rng(33);
    TrajectorySet truth(40, 1), pred(40, 1);
    add_track(truth, 0, 0, 0, 40, 0, 0, 1.0);
    for (const auto& [k, d] : truth.entries())
        pred.insert(k, UnitDirection::normalized(tilt(d.vec(), k.frame < 30 ? 10.0 : 30.0, rng)));
    const auto r = evaluate(pred, truth, classify_static_moving(truth));
    CHECK(r.sources_tp_moving == 1);
    CHECK(r.tp_moving == 30);
    CHECK(r.fn_moving == 10);
    CHECK(*r.pd_moving == 75.0);
    CHECK(r.sources.at(0).mean_error_deg == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(*r.classwise.at(0).mae() == doctest::Approx(15.0).epsilon(1e-9));
    CHECK(format_pd(r.pd_moving) == "75.0");
}

TEST_CASE("threshold 180 detects everything") {
    Rng rng(34);
    TrajectorySet truth(200, 4), pred(200, 4);
    add_track(truth, 0, 0, 0, 100, 0, 0, 2.0);
    add_track(truth, 2, 0, 50, 150, 100, 30, 0.0);
    for (const auto& [k, d] : truth.entries()) pred.insert(k, UnitDirection(testing::random_unit(rng)));
    const auto r = evaluate(pred, truth, classify_static_moving(truth), 180.0);
    CHECK(r.fn_static + r.fn_moving == 0);
    CHECK(r.sources_fn_static + r.sources_fn_moving == 0);
    CHECK(r.tp_static + r.tp_moving == 250);
}

TEST_CASE("same-class overlaps only change the scored frame count") {
    Rng rng(35);
    TrajectorySet truth(100, 2), pred(100, 2);
    add_track(truth, 0, 0, 0, 100, 20, 0, 0.5);
    add_track(truth, 1, 0, 0, 100, -20, 0, 0.0);
    for (const auto& [k, d] : truth.entries())
        pred.insert(k, UnitDirection::normalized(tilt(d.vec(), std::uniform_real_distribution<double>(0, 40)(rng), rng)));
    const auto before = evaluate(pred, truth, classify_static_moving(truth));

    TrajectorySet crowded = truth;
    add_track(crowded, 0, 1, 30, 20, 150, 0, 0.0);
    const auto after = evaluate(pred, crowded, classify_static_moving(crowded));
    CHECK(after.excluded_frames == 40);
    CHECK(before.tp_static + before.fn_static == 100);
    CHECK(after.tp_static + after.fn_static == 100);  // class 1 untouched
    CHECK(after.tp_moving + after.fn_moving == 80);
    // per-frame errors outside the overlap are unchanged
    long within = 0;
    for (int f = 0; f < 100; ++f) {
        if (f >= 30 && f < 50) continue;
        within += doa_error(truth.find({f, 0, 0})->vec(), pred.find({f, 0, 0})->vec()) < 20.0;
    }
    CHECK(after.tp_moving == within);
}

TEST_CASE("counts add up and pooled / per-recording aggregation") {
    Rng rng(36);
    std::vector<EvalReport> reports;
    for (int rec = 0; rec < 3; ++rec) {
        TrajectorySet truth(100 + 50 * rec, 2), pred(100 + 50 * rec, 2);
        add_track(truth, 0, 0, 0, 100 + 50 * rec, 0, 0, 0.0);
        add_track(truth, 1, 0, 0, 60, 90, 0, 1.0);
        for (const auto& [k, d] : truth.entries())
            pred.insert(k, UnitDirection::normalized(tilt(d.vec(), std::uniform_real_distribution<double>(0, 30)(rng), rng)));
        auto r = evaluate(pred, truth, classify_static_moving(truth));
        CHECK(r.tp_static + r.fn_static == 100 + 50 * rec);
        CHECK(r.tp_moving + r.fn_moving == 60);
        CHECK(*r.pd_static == doctest::Approx(100.0 * r.tp_static / (r.tp_static + r.fn_static)));
        reports.push_back(r);
    }
    const auto pooled = aggregate(reports, PdMode::Pooled);
    const auto per_rec = aggregate(reports, PdMode::PerRecording);
    long tps = 0, fns = 0;
    double mean = 0;
    for (const auto& r : reports) tps += r.tp_static, fns += r.fn_static, mean += *r.pd_static / 3;
    CHECK(pooled.tp_static == tps);
    CHECK(*pooled.pd_static == doctest::Approx(100.0 * tps / (tps + fns)));
    CHECK(*per_rec.pd_static == doctest::Approx(mean));
    CHECK(pooled.recordings == 3);
    const auto table = format_table({{"Model1", pooled}}, "Clean");
    CHECK(table.find("TPs") != std::string::npos);
    CHECK(table.find("Model1") != std::string::npos);
}

TEST_CASE("evaluation input checks") {
    TrajectorySet truth(10, 1), pred(10, 1);
    add_track(truth, 0, 0, 0, 10, 0, 0, 0.0);
    add_track(pred, 0, 0, 0, 9, 0, 0, 0.0);
    CHECK_THROWS_AS(evaluate(pred, truth, classify_static_moving(truth)), DataError);
    TrajectorySet longer(20, 1);
    CHECK_THROWS_AS(evaluate(longer, truth, classify_static_moving(truth)), DataError);
    TrajectorySet two(10, 1);
    add_track(two, 0, 0, 0, 10, 0, 0, 0.0);
    add_track(two, 0, 1, 0, 10, 0, 0, 0.0);
    CHECK_THROWS_AS(evaluate(two, truth, classify_static_moving(truth)), DataError);
}
