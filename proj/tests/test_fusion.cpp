#include "support.hpp"

#include "salsaloc/errors.hpp"
#include "salsaloc/fusion.hpp"
#include "salsaloc/metrics.hpp"

#include <doctest.h>

using namespace salsaloc;
using testing::add_track;

namespace {

PredictorOutput one_class(const std::vector<std::pair<int, Prediction>>& frames, int frame_count) {
    PredictorOutput p;
    p.frame_count = frame_count;
    p.class_count = 1;
    for (const auto& [f, pr] : frames) p.entries[{f, 0}] = pr;
    return p;
}

PredictorOutput random_predictions(Rng& rng, int frames, int classes) {
    PredictorOutput p;
    p.frame_count = frames;
    p.class_count = classes;
    std::normal_distribution<double> n(0.0, 1.0);
    std::bernoulli_distribution active(0.8);
    for (int c = 0; c < classes; ++c)
        for (int f = 0; f < frames; ++f)
            if (active(rng))
                p.entries[{f, c}] = {Vec3(n(rng), n(rng), n(rng)), 0.1 * Vec3(n(rng), n(rng), n(rng))};
    return p;
}

}  // namespace

TEST_CASE("constant input with zero derivative is a fixed point") {
    const Vec3 v = Vec3(0.3, -0.2, 0.9).normalized();
    const auto p = one_class({{0, {v, Vec3::Zero()}}, {1, {v, Vec3::Zero()}}, {2, {v, Vec3::Zero()}}}, 3);
    const auto fused = fuse(p, FusionConfig{});
    for (int f = 0; f < 3; ++f) CHECK((fused.find({f, 0, 0})->vec() - v).norm() < 1e-15);
}

TEST_CASE("one update step by hand") {
    const auto p = one_class({{0, {Vec3(1, 0, 0), Vec3::Zero()}}, {1, {Vec3(1, 0.1, 0), Vec3(0, 0.1, 0)}}}, 2);
    const auto raw = fuse_unnormalized(p, FusionConfig{});
    CHECK((raw.at({1, 0}) - Vec3(1, 0.1, 0)).norm() < 1e-15);
    CHECK((raw.at({0, 0}) - Vec3(1, 0, 0)).norm() == 0.0);
    CHECK((fuse(p, FusionConfig{}).find({1, 0, 0})->vec() - Vec3(1, 0.1, 0).normalized()).norm() < 1e-15);
}

TEST_CASE("equal weights give (y_N + y_{N-1} + y'_N) / 2 on random inputs") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_predictions(rng, 200, 3);
        const auto out = fuse_unnormalized(p, FusionConfig{});
        REQUIRE(out.size() == p.entries.size());
        for (const auto& [k, pr] : p.entries) {
            std::optional<int> prev;
            for (int f = k.frame - 1; f >= 0 && !prev; --f)
                if (p.entries.count({f, k.class_id})) prev = f;
            if (starts_segment(prev, k.frame, 20)) {
                CHECK((out.at(k) - pr.doa).norm() == 0.0);
            } else {
                const Vec3 want = (pr.doa + p.entries.at({*prev, k.class_id}).doa + pr.derivative) / 2.0;
                CHECK((out.at(k) - want).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
}

TEST_CASE("true DOAs with true derivatives are reproduced") {
    TrajectorySet truth(300, 2);
    add_track(truth, 0, 0, 0, 120, -150.0, 30.0, 2.5);
    add_track(truth, 1, 0, 50, 200, 10.0, -20.0, -1.0);
    const auto d = derivative_ground_truth(truth);
    PredictorOutput p;
    p.frame_count = 300;
    p.class_count = 2;
    for (const auto& [k, y] : truth.entries()) p.entries[k.class_frame()] = {y.vec(), d.at(k)};
    for (bool recursive : {false, true}) {
        const auto fused = fuse(p, FusionConfig{0.5, recursive, 20});
        for (const auto& [k, y] : truth.entries()) CHECK((fused.find({k.frame, k.class_id, 0})->vec() - y.vec()).norm() < 1e-9);
    }
}

TEST_CASE("alpha = 1 returns the normalized raw DOAs") {
    Rng rng(22);
    const auto p = random_predictions(rng, 100, 2);
    const auto fused = fuse(p, FusionConfig{1.0, false, 20});
    const auto raw = raw_trajectories(p);
    REQUIRE(fused.size() == raw.size());
    for (const auto& [k, v] : raw.entries()) CHECK((fused.find(k)->vec() - v.vec()).norm() == 0.0);
}

TEST_CASE("a segment ignores predictions before it") {
    Rng rng(23);
    auto p = random_predictions(rng, 100, 1);
    // silence 40..64 makes 65 a segment start
    for (int f = 40; f < 65; ++f) p.entries.erase({f, 0});
    p.entries[{65, 0}] = {Vec3(1, 1, 0), Vec3(0, 0, 1)};
    auto q = p;
    for (int f = 0; f < 40; ++f)
        if (q.entries.count({f, 0})) q.entries[{f, 0}].doa *= -3.0;
    for (bool recursive : {false, true}) {
        const FusionConfig cfg{0.5, recursive, 20};
        const auto a = fuse_unnormalized(p, cfg), b = fuse_unnormalized(q, cfg);
        CHECK((a.at({65, 0}) - Vec3(1, 1, 0)).norm() == 0.0);
        for (int f = 65; f < 100; ++f)
            if (a.count({f, 0})) CHECK(a.at({f, 0}) == b.at({f, 0}));
    }
}

TEST_CASE("recursive variant feeds back the fused estimate") {
    const auto p = one_class({{0, {Vec3(1, 0, 0), Vec3::Zero()}},
                              {1, {Vec3(0, 1, 0), Vec3(0, 0, 0)}},
                              {2, {Vec3(0, 0, 1), Vec3(0, 0, 0)}}},
                             3);
    const auto rec = fuse_unnormalized(p, FusionConfig{0.5, true, 20});
    CHECK((rec.at({1, 0}) - Vec3(0.5, 0.5, 0)).norm() < 1e-15);
    CHECK((rec.at({2, 0}) - Vec3(0.25, 0.25, 0.5)).norm() < 1e-15);
    const auto plain = fuse_unnormalized(p, FusionConfig{0.5, false, 20});
    CHECK((plain.at({2, 0}) - Vec3(0, 0.5, 0.5)).norm() < 1e-15);
}

TEST_CASE("fusion argument checks") {
    const auto p = one_class({{0, {Vec3(1, 0, 0), Vec3::Zero()}}, {1, {Vec3(-1, 0, 0), Vec3::Zero()}}}, 2);
    CHECK_THROWS_AS(fuse(p, FusionConfig{1.5, false, 20}), std::invalid_argument);
    CHECK_THROWS_AS(fuse(p, FusionConfig{0.5, false, 20}), NumericError);  // (-1 + 1 + 0) / 2 = 0
}

TEST_CASE("fusion report columns") {
    Rng rng(24);
    TrajectorySet truth(80, 2);
    add_track(truth, 0, 0, 0, 80, 0.0, 0.0, 1.0);
    add_track(truth, 1, 0, 10, 50, 90.0, 10.0, -1.0);
    const auto d = derivative_ground_truth(truth);
    PredictorOutput p;
    p.frame_count = 80;
    p.class_count = 2;
    for (const auto& [k, y] : truth.entries())
        p.entries[k.class_frame()] = {y.vec() + 0.2 * testing::random_unit(rng), d.at(k)};
    const auto fused = fuse(p, FusionConfig{});
    const auto rows = fuse_report(p, fused, truth);
    REQUIRE(rows.size() == p.entries.size());
    for (const auto& r : rows) {
        const Vec3 t = truth.find({r.frame, r.class_id, 0})->vec();
        CHECK(r.raw_error_deg == doctest::Approx(doa_error(t, p.entries.at({r.frame, r.class_id}).doa)));
        CHECK(r.fused_error_deg == doctest::Approx(doa_error(t, fused.find({r.frame, r.class_id, 0})->vec())));
        CHECK(r.derivative_norm == doctest::Approx(p.entries.at({r.frame, r.class_id}).derivative.norm()));
    }
    // raw = fused gives identical columns; fused = truth gives zero error
    const auto same = fuse_report(p, raw_trajectories(p), truth);
    for (const auto& r : same) CHECK(std::abs(r.raw_error_deg - r.fused_error_deg) < 1e-9);
    TrajectorySet as_truth(80, 2);
    for (const auto& [k, y] : truth.entries()) as_truth.insert({k.frame, k.class_id, 0}, y);
    for (const auto& r : fuse_report(p, as_truth, truth)) CHECK(r.fused_error_deg < 1e-6);
    TrajectorySet short_fused(80, 2);
    CHECK_THROWS_AS(fuse_report(p, short_fused, truth), DataError);
}
