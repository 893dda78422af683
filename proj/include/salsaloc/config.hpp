#pragma once

#include "salsaloc/fusion.hpp"
#include "salsaloc/geometry.hpp"
#include "salsaloc/metrics.hpp"
#include "salsaloc/predictor.hpp"
#include "salsaloc/salsa.hpp"
#include "salsaloc/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace salsaloc {

enum class PredictorKind { Oracle, Regressor };

/// Every knob of the pipeline. Defaults are listed in README.md; unknown
/// keys in a config file are rejected.
struct PipelineConfig {
    ArrayGeometry geometry = ArrayGeometry::tetrahedral();

    struct Scene {
        double sample_rate = 24000.0;
        double label_hop_s = 0.1;
        int count = 1;
        std::uint64_t seed = 1;
        std::optional<double> snr_db;  ///< unset: clean
        std::uint64_t noise_seed = 7;
        SceneGenerator generator;
        std::vector<SourceSpec> sources;  ///< explicit sources replace generation
    } scene;

    FeatureConfig features;

    struct Labels {
        int gap_frames = kDefaultGapFrames;
        double static_threshold_deg = kDefaultStaticThresholdDeg;
    } labels;

    struct Predictor {
        PredictorKind kind = PredictorKind::Oracle;
        OracleConfig oracle{10.0, 0.0, 0.0, 0.0, 11};
        bool scale_with_snr = true;  ///< oracle sigma grows with injected noise
        RegressorShape regressor{0, 32, 32, 32, 12};
        std::uint64_t init_seed = 3;
    } predictor;

    TrainConfig train;
    double validation_fraction = 0.0;

    FusionConfig fusion;

    struct Metrics {
        double threshold_deg = kDefaultThresholdDeg;
        PdMode pd_mode = PdMode::Pooled;
    } metrics;

    int workers = 1;
    std::filesystem::path output_dir = ".";

    /// STFT frames per label frame; throws ConfigError unless integral.
    std::size_t frames_per_label() const;
    int class_count() const { return scene.generator.class_count; }
};

/// Throws ConfigError naming the key path (e.g. "scene.generator.max_sources").
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

/// Complete serialization (every field, defaults included).
nlohmann::json to_json(const PipelineConfig& config);

/// Cross-field checks; throws ConfigError.
void validate(const PipelineConfig& config);

}  // namespace salsaloc
