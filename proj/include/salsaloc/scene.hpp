#pragma once

#include "salsaloc/audio.hpp"
#include "salsaloc/geometry.hpp"
#include "salsaloc/labels.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace salsaloc {

enum class SignalKind { WhiteNoise, ToneSweep, FilteredNoise };

const char* to_string(SignalKind kind);
/// Accepts "white_noise", "tone_sweep", "filtered_noise".
SignalKind signal_kind_from_string(const std::string& name);

struct Waypoint {
    int frame = 0;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

/// One sound event. Active on label frames [onset_frame, offset_frame],
/// both inclusive. Between waypoints the DOA moves linearly in azimuth
/// (along the shorter arc) and elevation; outside them it is held.
struct SourceSpec {
    int class_id = 0;
    int track_id = 0;
    std::vector<Waypoint> waypoints;
    int onset_frame = 0;
    int offset_frame = 0;
    SignalKind signal = SignalKind::WhiteNoise;
    double level_db = 0.0;
};

struct SceneSpec {
    std::vector<SourceSpec> sources;
    int duration_frames = 600;
    double label_hop_s = 0.1;
    double sample_rate = 24000.0;
    int class_count = 12;
    ArrayGeometry geometry = ArrayGeometry::tetrahedral();
    std::uint64_t seed = 0;

    /// Samples per label frame; validate() guarantees it is integral.
    std::size_t hop_samples() const;
};

/// Throws DataError naming the offending source and field.
void validate(const SceneSpec& spec);

/// Ground-truth DOAs of every source on every active frame.
TrajectorySet scene_trajectories(const SceneSpec& spec);

struct RenderedScene {
    MultichannelAudio audio;
    TrajectorySet truth;
};

/// Renders each source as a far-field plane wave. Per label frame the dry
/// signal block is moved to the frequency domain, multiplied by the array
/// response of that frame's DOA and overlap-added back. Sources sum; the
/// mixture is peak-normalized to 0.9. Deterministic in spec.seed.
RenderedScene render(const SceneSpec& spec);

/// Independent zero-mean Gaussian noise per channel whose power equals the
/// mean signal power (all channels, whole recording) divided by 10^(snr/10).
/// Throws DataError for silent input.
SampleMatrix awgn_noise(const MultichannelAudio& audio, double snr_db, std::uint64_t seed);

/// audio + awgn_noise(audio, snr_db, seed).
MultichannelAudio add_awgn(const MultichannelAudio& audio, double snr_db, std::uint64_t seed);

/// Parameters for random scene generation.
struct SceneGenerator {
    int duration_frames = 600;
    int class_count = 12;
    int min_sources = 2;
    int max_sources = 6;
    int min_event_frames = 20;
    int max_event_frames = 200;
    double moving_fraction = 0.5;
    double min_speed_deg = 0.5;   ///< degrees per label frame, moving sources
    double max_speed_deg = 3.0;
    double max_elevation_deg = 45.0;
    std::vector<SignalKind> signals{SignalKind::WhiteNoise, SignalKind::ToneSweep,
                                    SignalKind::FilteredNoise};
};

/// Random scene: each source gets a unique (class, track), a random onset,
/// length and signal; moving sources sweep azimuth at a constant rate and
/// drift in elevation. Sources never leave the [-45, 45] elevation band.
SceneSpec generate_scene(const SceneGenerator& gen, const ArrayGeometry& geometry,
                         std::uint64_t seed);

}  // namespace salsaloc
