#include "salsaloc/scene.hpp"
#include "salsaloc/errors.hpp"
#include "salsaloc/fft.hpp"
#include "salsaloc/random.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace salsaloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPeak = 0.9;

std::string where(std::size_t i) { return "scene: source " + std::to_string(i) + ": "; }

/// Wraps to [-180, 180).
double wrap_deg(double a) {
    a = std::fmod(a + 180.0, 360.0);
    if (a < 0.0) a += 360.0;
    return a - 180.0;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

UnitDirection direction_at(const SourceSpec& s, int frame) {
    const auto& w = s.waypoints;
    if (frame <= w.front().frame) return UnitDirection::from_angles(w.front().azimuth_deg, w.front().elevation_deg);
    if (frame >= w.back().frame) return UnitDirection::from_angles(w.back().azimuth_deg, w.back().elevation_deg);
    auto hi = std::upper_bound(w.begin(), w.end(), frame,
                               [](int f, const Waypoint& p) { return f < p.frame; });
    auto lo = hi - 1;
    const double t = static_cast<double>(frame - lo->frame) / (hi->frame - lo->frame);
    const double daz = wrap_deg(hi->azimuth_deg - lo->azimuth_deg);
    const double az = wrap_deg(lo->azimuth_deg + t * daz);
    const double el = lo->elevation_deg + t * (hi->elevation_deg - lo->elevation_deg);
    return UnitDirection::from_angles(az, el);
}

/// Unit-RMS dry signal.
std::vector<double> dry_signal(SignalKind kind, std::size_t length, double sample_rate, Rng& rng) {
    std::vector<double> x(length);
    std::normal_distribution<double> gauss(0.0, 1.0);
    switch (kind) {
        case SignalKind::WhiteNoise:
            for (auto& v : x) v = gauss(rng);
            break;
        case SignalKind::ToneSweep: {
            // Sawtooth frequency sweep 200 Hz -> 3 kHz once per second.
            const double f0 = 200.0, f1 = 3000.0, period = 1.0;
            std::uniform_real_distribution<double> start(0.0, 2.0 * kPi);
            double phase = start(rng);
            for (std::size_t n = 0; n < length; ++n) {
                const double t = std::fmod(static_cast<double>(n) / sample_rate, period) / period;
                const double f = f0 + (f1 - f0) * t;
                x[n] = std::sqrt(2.0) * std::sin(phase);
                phase = std::fmod(phase + 2.0 * kPi * f / sample_rate, 2.0 * kPi);
            }
            break;
        }
        case SignalKind::FilteredNoise: {
            // RBJ band-pass (constant peak gain), centre 800 Hz, Q = 0.707.
            const double w0 = 2.0 * kPi * 800.0 / sample_rate;
            const double alpha = std::sin(w0) / (2.0 * 0.707);
            const double a0 = 1.0 + alpha;
            const double b0 = alpha / a0, b2 = -alpha / a0;
            const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
            double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
            for (auto& v : x) {
                const double in = gauss(rng);
                const double y = b0 * in + b2 * x2 - a1 * y1 - a2 * y2;
                x2 = x1;
                x1 = in;
                y2 = y1;
                y1 = y;
                v = y;
            }
            double power = 0.0;
            for (double v : x) power += v * v;
            if (power > 0.0) {
                const double g = 1.0 / std::sqrt(power / static_cast<double>(length));
                for (auto& v : x) v *= g;
            }
            break;
        }
    }
    return x;
}

}  // namespace

const char* to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::WhiteNoise: return "white_noise";
        case SignalKind::ToneSweep: return "tone_sweep";
        case SignalKind::FilteredNoise: return "filtered_noise";
    }
    return "?";
}

SignalKind signal_kind_from_string(const std::string& name) {
    if (name == "white_noise") return SignalKind::WhiteNoise;
    if (name == "tone_sweep") return SignalKind::ToneSweep;
    if (name == "filtered_noise") return SignalKind::FilteredNoise;
    throw DataError("unknown signal kind '" + name + "'");
}

std::size_t SceneSpec::hop_samples() const {
    return static_cast<std::size_t>(std::llround(sample_rate * label_hop_s));
}

void validate(const SceneSpec& spec) {
    if (!(spec.sample_rate > 0.0)) throw DataError("scene: sample_rate must be positive");
    if (!(spec.label_hop_s > 0.0)) throw DataError("scene: label_hop_s must be positive");
    const double hop = spec.sample_rate * spec.label_hop_s;
    if (std::abs(hop - std::round(hop)) > 1e-6 || std::round(hop) < 1.0)
        throw DataError("scene: sample_rate * label_hop_s must be a whole number of samples");
    if (spec.duration_frames < 0) throw DataError("scene: negative duration_frames");
    if (spec.class_count < 1) throw DataError("scene: class_count must be >= 1");

    for (std::size_t i = 0; i < spec.sources.size(); ++i) {
        const auto& s = spec.sources[i];
        if (s.class_id < 0 || s.class_id >= spec.class_count)
            throw DataError(where(i) + "class_id " + std::to_string(s.class_id) + " out of range");
        if (s.track_id < 0) throw DataError(where(i) + "negative track_id");
        if (s.onset_frame < 0 || s.onset_frame >= s.offset_frame)
            throw DataError(where(i) + "requires 0 <= onset_frame < offset_frame");
        if (s.offset_frame >= spec.duration_frames)
            throw DataError(where(i) + "offset_frame beyond scene duration");
        if (!std::isfinite(s.level_db)) throw DataError(where(i) + "level_db not finite");
        if (s.waypoints.empty()) throw DataError(where(i) + "needs at least one waypoint");
        for (std::size_t k = 0; k < s.waypoints.size(); ++k) {
            const auto& w = s.waypoints[k];
            if (w.frame < s.onset_frame || w.frame > s.offset_frame)
                throw DataError(where(i) + "waypoint " + std::to_string(k) + " outside [onset, offset]");
            if (k > 0 && w.frame <= s.waypoints[k - 1].frame)
                throw DataError(where(i) + "waypoints must be strictly increasing in frame");
            if (!(w.azimuth_deg >= -180.0 && w.azimuth_deg < 180.0))
                throw DataError(where(i) + "azimuth " + std::to_string(w.azimuth_deg) +
                                " outside [-180, 180)");
            if (!(w.elevation_deg >= -45.0 && w.elevation_deg <= 45.0))
                throw DataError(where(i) + "elevation " + std::to_string(w.elevation_deg) +
                                " outside [-45, 45]");
        }
        for (std::size_t j = 0; j < i; ++j) {
            const auto& o = spec.sources[j];
            if (o.class_id == s.class_id && o.track_id == s.track_id &&
                o.onset_frame <= s.offset_frame && s.onset_frame <= o.offset_frame)
                throw DataError(where(i) + "overlaps source " + std::to_string(j) +
                                " with the same class and track");
        }
    }
}

TrajectorySet scene_trajectories(const SceneSpec& spec) {
    validate(spec);
    TrajectorySet truth(spec.duration_frames, spec.class_count);
    for (const auto& s : spec.sources)
        for (int f = s.onset_frame; f <= s.offset_frame; ++f)
            truth.insert({f, s.class_id, s.track_id}, direction_at(s, f));
    return truth;
}

RenderedScene render(const SceneSpec& spec) {
    RenderedScene out{{}, scene_trajectories(spec)};
    const std::size_t hop = spec.hop_samples();
    const std::size_t total = hop * static_cast<std::size_t>(spec.duration_frames);
    const std::size_t mics = spec.geometry.mic_count();
    const double c = spec.geometry.speed_of_sound();

    out.audio.sample_rate = spec.sample_rate;
    out.audio.samples = SampleMatrix::Zero(static_cast<Eigen::Index>(mics), static_cast<Eigen::Index>(total));
    if (spec.sources.empty()) return out;

    // Block of `hop` samples sits at offset `pad` inside the FFT buffer so
    // that both advanced and delayed copies (and their fractional-delay
    // tails) stay inside it.
    const std::size_t pad = hop;
    const std::size_t nfft = next_pow2(hop + 2 * pad);
    const std::size_t bins = nfft / 2 + 1;
    RealFft fft(nfft);
    std::vector<double> block(nfft), shifted(nfft);
    std::vector<std::complex<double>> spectrum(bins), steered(bins);
    const auto others = spec.geometry.others();

    for (std::size_t i = 0; i < spec.sources.size(); ++i) {
        const auto& s = spec.sources[i];
        Rng rng(derive_seed(spec.seed, i));
        const std::size_t first = static_cast<std::size_t>(s.onset_frame) * hop;
        const std::size_t span = static_cast<std::size_t>(s.offset_frame - s.onset_frame + 1) * hop;
        std::vector<double> dry = dry_signal(s.signal, span, spec.sample_rate, rng);
        const double gain = std::pow(10.0, s.level_db / 20.0);

        for (int f = s.onset_frame; f <= s.offset_frame; ++f) {
            const std::size_t start = static_cast<std::size_t>(f) * hop;
            std::fill(block.begin(), block.end(), 0.0);
            std::copy_n(dry.begin() + static_cast<std::ptrdiff_t>(start - first), hop,
                        block.begin() + static_cast<std::ptrdiff_t>(pad));
            fft.forward(block, spectrum);

            std::vector<double> d(mics, 0.0);
            const auto r = rdoa(spec.geometry, out.truth.entries().at({f, s.class_id, s.track_id}));
            for (std::size_t k = 0; k < others.size(); ++k) d[others[k]] = r[k];

            for (std::size_t m = 0; m < mics; ++m) {
                for (std::size_t b = 0; b < bins; ++b) {
                    const double freq = static_cast<double>(b) * spec.sample_rate / static_cast<double>(nfft);
                    auto h = array_response(freq, d[m], c);
                    if (b == bins - 1) h = {h.real(), 0.0};  // Nyquist bin stays real
                    steered[b] = spectrum[b] * h;
                }
                fft.inverse(steered, shifted);
                const double scale = gain / static_cast<double>(nfft);
                auto row = out.audio.samples.row(static_cast<Eigen::Index>(m));
                for (std::size_t j = 0; j < nfft; ++j) {
                    const auto pos = static_cast<std::ptrdiff_t>(start + j) - static_cast<std::ptrdiff_t>(pad);
                    if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(total)) row(pos) += scale * shifted[j];
                }
            }
        }
    }

    const double peak = out.audio.samples.cwiseAbs().maxCoeff();
    if (peak > 0.0) out.audio.samples *= kPeak / peak;
    return out;
}

SampleMatrix awgn_noise(const MultichannelAudio& audio, double snr_db, std::uint64_t seed) {
    if (!std::isfinite(snr_db)) throw DataError("add_awgn: snr_db must be finite");
    const double signal_power = audio.mean_power();
    if (!(signal_power > 0.0)) throw DataError("add_awgn: input is silent, SNR undefined");
    const double sigma = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
    SampleMatrix noise(audio.samples.rows(), audio.samples.cols());
    for (Eigen::Index m = 0; m < noise.rows(); ++m) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
        std::normal_distribution<double> gauss(0.0, sigma);
        for (Eigen::Index n = 0; n < noise.cols(); ++n) noise(m, n) = gauss(rng);
    }
    return noise;
}

MultichannelAudio add_awgn(const MultichannelAudio& audio, double snr_db, std::uint64_t seed) {
    MultichannelAudio out = audio;
    out.samples += awgn_noise(audio, snr_db, seed);
    return out;
}

SceneSpec generate_scene(const SceneGenerator& gen, const ArrayGeometry& geometry,
                         std::uint64_t seed) {
    if (gen.min_sources < 0 || gen.max_sources < gen.min_sources)
        throw DataError("generate_scene: invalid source count range");
    if (gen.min_event_frames < 2 || gen.max_event_frames < gen.min_event_frames ||
        gen.min_event_frames > gen.duration_frames)
        throw DataError("generate_scene: invalid event length range");
    if (gen.signals.empty()) throw DataError("generate_scene: no signal kinds");
    if (!(gen.max_elevation_deg >= 0.0 && gen.max_elevation_deg <= 45.0))
        throw DataError("generate_scene: max_elevation_deg must be in [0, 45]");

    Rng rng(seed);
    SceneSpec spec;
    spec.duration_frames = gen.duration_frames;
    spec.class_count = gen.class_count;
    spec.geometry = geometry;
    spec.seed = derive_seed(seed, 0xA0D10);

    std::uniform_int_distribution<int> n_sources(gen.min_sources, gen.max_sources);
    std::uniform_int_distribution<int> cls(0, gen.class_count - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> az(-180.0, 180.0);
    std::uniform_real_distribution<double> el(-gen.max_elevation_deg, gen.max_elevation_deg);
    std::uniform_int_distribution<std::size_t> kind(0, gen.signals.size() - 1);
    std::vector<int> next_track(static_cast<std::size_t>(gen.class_count), 0);

    const int count = n_sources(rng);
    for (int i = 0; i < count; ++i) {
        SourceSpec s;
        s.class_id = cls(rng);
        s.track_id = next_track[static_cast<std::size_t>(s.class_id)]++;
        const int max_len = std::min(gen.max_event_frames, gen.duration_frames);
        const int length = std::uniform_int_distribution<int>(gen.min_event_frames, max_len)(rng);
        s.onset_frame = std::uniform_int_distribution<int>(0, gen.duration_frames - length)(rng);
        s.offset_frame = s.onset_frame + length - 1;
        s.signal = gen.signals[kind(rng)];
        s.level_db = -6.0 * unit(rng);

        const double az0 = wrap_deg(az(rng));
        const double el0 = el(rng);
        s.waypoints.push_back({s.onset_frame, az0, el0});
        if (unit(rng) < gen.moving_fraction) {
            const double speed = gen.min_speed_deg + (gen.max_speed_deg - gen.min_speed_deg) * unit(rng);
            const double dir = unit(rng) < 0.5 ? -1.0 : 1.0;
            // Keep each leg under 180 degrees so the shorter arc is the intended one.
            const int legs = static_cast<int>(std::ceil(speed * (length - 1) / 170.0));
            const double el1 = el(rng);
            for (int leg = 1; leg <= legs; ++leg) {
                const double t = static_cast<double>(leg) / legs;
                const int frame = s.onset_frame + static_cast<int>(std::lround(t * (length - 1)));
                if (frame <= s.waypoints.back().frame) continue;
                s.waypoints.push_back({frame, wrap_deg(az0 + dir * speed * (frame - s.onset_frame)),
                                       el0 + t * (el1 - el0)});
            }
        }
        spec.sources.push_back(std::move(s));
    }
    return spec;
}

}  // namespace salsaloc
