#include "support.hpp"

#include "salsaloc/config.hpp"
#include "salsaloc/errors.hpp"

#include <doctest.h>

using namespace salsaloc;
using nlohmann::json;

namespace {

std::string failing_key(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
    const auto c = parse_config(json::object());
    CHECK(c.scene.sample_rate == 24000);
    CHECK(c.scene.label_hop_s == 0.1);
    CHECK(c.features.window_size == 512);
    CHECK(c.features.hop_size == 240);
    CHECK(c.features.band_lo_hz == 50);
    CHECK(c.features.band_hi_hz == 2000);
    CHECK(c.frames_per_label() == 10);
    CHECK(c.labels.gap_frames == 20);
    CHECK(c.fusion.alpha == 0.5);
    CHECK(!c.fusion.recursive);
    CHECK(c.metrics.threshold_deg == 20);
    CHECK(c.train.epochs == 70);
    CHECK(c.train.batch_size == 32);
    CHECK(c.geometry.mic_count() == 4);
    CHECK(c.class_count() == 12);
}

TEST_CASE("serialization round trip") {
    const json in = {
        {"geometry", {{"kind", "custom"}, {"mic_positions", {{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}}}}},
        {"scene", {{"snr_db", -5}, {"sources", {{{"class", 2}, {"track", 0}, {"onset_frame", 0},
                                                 {"offset_frame", 9}, {"waypoints", {{0, 10, 0}, {9, 20, 5}}}}}}}},
        {"fusion", {{"alpha", 0.7}, {"recursive", true}}},
        {"metrics", {{"pd_mode", "per_recording"}}},
        {"workers", 3},
    };
    const auto c = parse_config(in);
    CHECK(c.geometry.mic_count() == 3);
    CHECK(*c.scene.snr_db == -5);
    CHECK(c.scene.sources.at(0).waypoints.at(1).elevation_deg == 5);
    CHECK(c.fusion.alpha == 0.7);
    CHECK(c.metrics.pd_mode == PdMode::PerRecording);
    const json out = to_json(c);
    CHECK(to_json(parse_config(out)) == out);
    CHECK(to_json(parse_config(json::object())) == to_json(PipelineConfig{}));
}

TEST_CASE("bad configs name the offending key") {
    CHECK(failing_key({{"bogus", 1}}) == "bogus");
    CHECK(failing_key({{"scene", {{"generator", {{"max_sourcez", 3}}}}}}) == "scene.generator.max_sourcez");
    CHECK(failing_key({{"fusion", {{"alpha", 1.5}}}}) == "fusion.alpha");
    CHECK(failing_key({{"fusion", {{"alpha", "half"}}}}) == "fusion.alpha");
    CHECK(failing_key({{"features", {{"window_size", 500}}}}) == "features.window_size");
    CHECK(failing_key({{"features", {{"hop_size", 250}}}}) == "features.hop_size");
    CHECK(failing_key({{"train", {{"epochs", 10}}}}) == "train.lr_decay_last_epochs");
    CHECK(failing_key({{"predictor", {{"kind", "cnn"}}}}) == "predictor.kind");
    CHECK(failing_key({{"scene", {{"sources", {{{"class", 0}}}}}}}) == "scene.sources[0].waypoints");
    CHECK(failing_key({{"geometry", {{"kind", "custom"}, {"mic_positions", {{0, 0}}}}}}) ==
          "geometry.mic_positions[0]");
}
