#include "gradcheck.hpp"
#include "support.hpp"

#include "salsaloc/errors.hpp"
#include "salsaloc/io.hpp"
#include "salsaloc/store.hpp"

#include <doctest.h>

using namespace salsaloc;
using testing::add_track;

TEST_CASE("metadata CSV round trip") {
    TrajectorySet t(120, 5);
    add_track(t, 0, 0, 0, 100, -179.5, 12.25, -0.75);
    add_track(t, 4, 2, 60, 40, 33.0, -44.0, 0.3);
    const std::string text = format_metadata(t, {"note"});
    CHECK(text.rfind("# note\n# frames=120 classes=5\n", 0) == 0);
    const auto back = parse_metadata(text);
    CHECK(back.frame_count() == 120);
    CHECK(back.class_count() == 5);
    REQUIRE(back.size() == t.size());
    for (const auto& [k, d] : t.entries()) CHECK(doa_error(back.find(k)->vec(), d.vec()) < 1e-5);
    CHECK(format_metadata(back, {"note"}) == text);
    CHECK_THROWS_AS(parse_metadata("# frames=10 classes=1\n20,0,0,0,0\n"), DataError);
}

TEST_CASE("azimuth 180 is written as -180") {
    TrajectorySet t(1, 1);
    t.insert({0, 0, 0}, UnitDirection::from_angles(179.9999999, 0));
    CHECK(format_metadata(t).find("-180.000000") != std::string::npos);
}

TEST_CASE("derivative CSV round trip") {
    TrajectorySet t(50, 2);
    add_track(t, 1, 0, 0, 50, 10, 0, 2.0);
    const auto d = derivative_ground_truth(t);
    const auto [truth, derivs] = parse_derivatives(format_derivatives(t, d));
    REQUIRE(derivs.size() == d.size());
    for (const auto& [k, v] : d) CHECK((derivs.at(k) - v).norm() < 1e-8);
    CHECK(truth.size() == t.size());
}

TEST_CASE("prediction CSV round trip and errors") {
    PredictorOutput p;
    p.frame_count = 30;
    p.class_count = 3;
    p.entries[{2, 1}] = {Vec3(0.1, -0.2, 0.3), Vec3(1e-3, 0, -1e-3)};
    p.entries[{29, 2}] = {Vec3(1, 0, 0), Vec3::Zero()};
    const auto text = format_predictions(p);
    const auto back = parse_predictions(text);
    CHECK(back.frame_count == 30);
    CHECK(back.class_count == 3);
    CHECK(back.entries.size() == 2);
    CHECK((back.entries.at({2, 1}).doa - p.entries.at({2, 1}).doa).norm() < 1e-9);
    CHECK(format_predictions(back) == text);
    CHECK_THROWS_AS(parse_predictions("1,0,1,0,0,0,0,0\n"), DataError);
    CHECK_THROWS_AS(parse_predictions(std::string(kPredictionHeader) + "\n1,0,1,0,0,0,0\n"), DataError);
    CHECK_THROWS_AS(parse_predictions(std::string(kPredictionHeader) + "\n1,0,1,0,0,0,0,0\n1,0,1,0,0,0,0,0\n"),
                    DataError);
}

TEST_CASE("feature file and checkpoint round trips") {
    testing::TempDir dir("store");
    SalsaLiteFeature f;
    f.data = Tensor({3, 4, 2});
    double v = 0.5;
    for (auto& x : f.data.data()) x = v *= -1.25;
    f.log_power_channels = 2;
    f.first_bin = 2;
    f.freqs_hz = {93.75, 140.625};
    f.band_lo_hz = 50;
    f.band_hi_hz = 2000;
    f.hop_size = 240;
    f.sample_rate = 24000;
    save_features(dir / "f.slt", f);
    const auto g = load_features(dir / "f.slt");
    CHECK(g.freqs_hz == f.freqs_hz);
    CHECK(g.first_bin == 2);
    for (std::size_t i = 0; i < f.data.size(); ++i)
        CHECK(g.data.data()[i] == static_cast<double>(static_cast<float>(f.data.data()[i])));
    save_features(dir / "g.slt", g);
    CHECK(read_file_bytes(dir / "f.slt") == read_file_bytes(dir / "g.slt"));

    const auto [p, seq] = testing::tiny_problem(3);
    save_checkpoint(dir / "c.slt", p);
    const auto q = load_checkpoint(dir / "c.slt");
    CHECK(q.shape == p.shape);
    for (std::size_t b = 0; b < kBlockCount; ++b) CHECK(q.blocks[b] == p.blocks[b]);
    CHECK(q.input_scale == p.input_scale);
    CHECK(sequence_loss(q, seq) == sequence_loss(p, seq));

    write_container_file(dir / "bad.slt", {{"features", Tensor({3}), DType::F32}});
    CHECK_THROWS_AS(load_features(dir / "bad.slt"), DataError);
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.slt"), DataError);
}

TEST_CASE("report CSV lists summary and sources") {
    TrajectorySet truth(20, 2);
    add_track(truth, 0, 0, 0, 20, 0, 0, 0.0);
    const auto r = evaluate(truth, truth, classify_static_moving(truth));
    const auto text = format_report_csv(r, {"x"});
    CHECK(text.find("summary,Pds,100.0") != std::string::npos);
    CHECK(text.find("class,track,motion") != std::string::npos);
    CHECK(text.find("0,0,static,20,20,") != std::string::npos);
}
