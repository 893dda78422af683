#include "salsaloc/config.hpp"
#include "salsaloc/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace salsaloc {

using nlohmann::json;

namespace {

/// Walks one JSON object, tracking which keys were consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    void read(const std::string& key, T& out) {
        auto it = j_.find(key);
        if (it == j_.end()) return;
        used_.insert(key);
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError(key_path(key), "wrong type");
        }
        if constexpr (std::is_floating_point_v<T>)
            if (!std::isfinite(out)) throw ConfigError(key_path(key), "must be finite");
    }

    const json* child(const std::string& key) {
        auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        used_.insert(key);
        return &*it;
    }

    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!used_.count(k)) throw ConfigError(key_path(k), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError(key, message);
}

Vec3 vec3_from(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(key, "expected [x, y, z]");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number()) throw ConfigError(key, "expected numbers");
        v[i] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

ArrayGeometry parse_geometry(const json& j) {
    Section s(j, "geometry");
    std::string kind = "tetrahedral";
    double radius = kDefaultTetraRadius, c = kDefaultSpeedOfSound;
    int reference = 0;
    s.read("kind", kind);
    s.read("radius_m", radius);
    s.read("speed_of_sound", c);
    s.read("reference_index", reference);
    const json* mics = s.child("mic_positions");
    s.finish();
    try {
        if (kind == "tetrahedral") {
            if (mics) throw ConfigError("geometry.mic_positions", "not allowed with kind=tetrahedral");
            if (reference != 0) throw ConfigError("geometry.reference_index", "tetrahedral uses mic 0");
            return ArrayGeometry::tetrahedral(radius, c);
        }
        if (kind == "custom") {
            if (!mics || !mics->is_array()) throw ConfigError("geometry.mic_positions", "required for kind=custom");
            std::vector<Vec3> pos;
            for (std::size_t i = 0; i < mics->size(); ++i)
                pos.push_back(vec3_from((*mics)[i], "geometry.mic_positions[" + std::to_string(i) + "]"));
            require(reference >= 0, "geometry.reference_index", "must be >= 0");
            return ArrayGeometry(std::move(pos), static_cast<std::size_t>(reference), c);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("geometry", e.what());
    }
    throw ConfigError("geometry.kind", "expected 'tetrahedral' or 'custom'");
}

SourceSpec parse_source(const json& j, const std::string& path) {
    Section s(j, path);
    SourceSpec src;
    std::string signal = to_string(src.signal);
    s.read("class", src.class_id);
    s.read("track", src.track_id);
    s.read("onset_frame", src.onset_frame);
    s.read("offset_frame", src.offset_frame);
    s.read("level_db", src.level_db);
    s.read("signal", signal);
    const json* wps = s.child("waypoints");
    s.finish();
    try {
        src.signal = signal_kind_from_string(signal);
    } catch (const DataError& e) {
        throw ConfigError(path + ".signal", e.what());
    }
    if (!wps || !wps->is_array()) throw ConfigError(path + ".waypoints", "required array of [frame, az, el]");
    for (std::size_t i = 0; i < wps->size(); ++i) {
        const auto& w = (*wps)[i];
        const std::string key = path + ".waypoints[" + std::to_string(i) + "]";
        if (!w.is_array() || w.size() != 3 || !w[0].is_number_integer() || !w[1].is_number() || !w[2].is_number())
            throw ConfigError(key, "expected [frame, azimuth_deg, elevation_deg]");
        src.waypoints.push_back({w[0].get<int>(), w[1].get<double>(), w[2].get<double>()});
    }
    return src;
}

std::vector<SignalKind> parse_signals(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("scene.generator.signals", "expected a non-empty array");
    std::vector<SignalKind> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw ConfigError("scene.generator.signals", "expected strings");
        try {
            out.push_back(signal_kind_from_string(v.get<std::string>()));
        } catch (const DataError& e) {
            throw ConfigError("scene.generator.signals", e.what());
        }
    }
    return out;
}

}  // namespace

std::size_t PipelineConfig::frames_per_label() const {
    const double ratio = scene.sample_rate * scene.label_hop_s / static_cast<double>(features.hop_size);
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0)
        throw ConfigError("features.hop_size", "label frame must span a whole number of STFT hops");
    return static_cast<std::size_t>(std::llround(ratio));
}

PipelineConfig parse_config(const json& j) {
    PipelineConfig cfg;
    Section root(j, "");
    if (const json* g = root.child("geometry")) cfg.geometry = parse_geometry(*g);

    if (const json* sj = root.child("scene")) {
        Section s(*sj, "scene");
        s.read("sample_rate", cfg.scene.sample_rate);
        s.read("label_hop_s", cfg.scene.label_hop_s);
        s.read("count", cfg.scene.count);
        s.read("seed", cfg.scene.seed);
        s.read("noise_seed", cfg.scene.noise_seed);
        if (const json* snr = s.child("snr_db"); snr && !snr->is_null()) {
            if (!snr->is_number()) throw ConfigError("scene.snr_db", "expected a number or null");
            cfg.scene.snr_db = snr->get<double>();
        }
        if (const json* gj = s.child("generator")) {
            Section g(*gj, "scene.generator");
            auto& gen = cfg.scene.generator;
            g.read("duration_frames", gen.duration_frames);
            g.read("class_count", gen.class_count);
            g.read("min_sources", gen.min_sources);
            g.read("max_sources", gen.max_sources);
            g.read("min_event_frames", gen.min_event_frames);
            g.read("max_event_frames", gen.max_event_frames);
            g.read("moving_fraction", gen.moving_fraction);
            g.read("min_speed_deg", gen.min_speed_deg);
            g.read("max_speed_deg", gen.max_speed_deg);
            g.read("max_elevation_deg", gen.max_elevation_deg);
            if (const json* sig = g.child("signals")) gen.signals = parse_signals(*sig);
            g.finish();
        }
        if (const json* src = s.child("sources")) {
            if (!src->is_array()) throw ConfigError("scene.sources", "expected an array");
            for (std::size_t i = 0; i < src->size(); ++i)
                cfg.scene.sources.push_back(parse_source((*src)[i], "scene.sources[" + std::to_string(i) + "]"));
        }
        s.finish();
    }

    if (const json* fj = root.child("features")) {
        Section f(*fj, "features");
        f.read("window_size", cfg.features.window_size);
        f.read("hop_size", cfg.features.hop_size);
        f.read("band_lo_hz", cfg.features.band_lo_hz);
        f.read("band_hi_hz", cfg.features.band_hi_hz);
        f.finish();
    }

    if (const json* lj = root.child("labels")) {
        Section l(*lj, "labels");
        l.read("gap_frames", cfg.labels.gap_frames);
        l.read("static_threshold_deg", cfg.labels.static_threshold_deg);
        l.finish();
    }

    if (const json* pj = root.child("predictor")) {
        Section p(*pj, "predictor");
        std::string kind = "oracle";
        p.read("kind", kind);
        if (kind == "oracle")
            cfg.predictor.kind = PredictorKind::Oracle;
        else if (kind == "regressor")
            cfg.predictor.kind = PredictorKind::Regressor;
        else
            throw ConfigError("predictor.kind", "expected 'oracle' or 'regressor'");
        p.read("scale_with_snr", cfg.predictor.scale_with_snr);
        p.read("init_seed", cfg.predictor.init_seed);
        if (const json* oj = p.child("oracle")) {
            Section o(*oj, "predictor.oracle");
            o.read("noise_sigma_deg", cfg.predictor.oracle.noise_sigma_deg);
            o.read("outlier_rate", cfg.predictor.oracle.outlier_rate);
            o.read("outlier_sigma_deg", cfg.predictor.oracle.outlier_sigma_deg);
            o.read("deriv_noise_scale", cfg.predictor.oracle.deriv_noise_scale);
            o.read("seed", cfg.predictor.oracle.seed);
            o.finish();
        }
        if (const json* rj = p.child("regressor")) {
            Section r(*rj, "predictor.regressor");
            r.read("hidden1", cfg.predictor.regressor.hidden1);
            r.read("hidden2", cfg.predictor.regressor.hidden2);
            r.read("state", cfg.predictor.regressor.state);
            r.finish();
        }
        p.finish();
    }

    if (const json* tj = root.child("train")) {
        Section t(*tj, "train");
        t.read("epochs", cfg.train.epochs);
        t.read("batch_size", cfg.train.batch_size);
        t.read("lr_initial", cfg.train.lr_initial);
        t.read("lr_final", cfg.train.lr_final);
        t.read("lr_decay_last_epochs", cfg.train.lr_decay_last_epochs);
        t.read("beta1", cfg.train.beta1);
        t.read("beta2", cfg.train.beta2);
        t.read("epsilon", cfg.train.epsilon);
        t.read("seed", cfg.train.seed);
        t.read("validation_fraction", cfg.validation_fraction);
        t.finish();
    }

    if (const json* fj = root.child("fusion")) {
        Section f(*fj, "fusion");
        f.read("alpha", cfg.fusion.alpha);
        f.read("recursive", cfg.fusion.recursive);
        f.finish();
    }

    if (const json* mj = root.child("metrics")) {
        Section m(*mj, "metrics");
        std::string mode = "pooled";
        m.read("threshold_deg", cfg.metrics.threshold_deg);
        m.read("pd_mode", mode);
        if (mode == "pooled")
            cfg.metrics.pd_mode = PdMode::Pooled;
        else if (mode == "per_recording")
            cfg.metrics.pd_mode = PdMode::PerRecording;
        else
            throw ConfigError("metrics.pd_mode", "expected 'pooled' or 'per_recording'");
        m.finish();
    }

    root.read("workers", cfg.workers);
    if (const json* paths = root.child("paths")) {
        Section p(*paths, "paths");
        std::string out = cfg.output_dir.string();
        p.read("output_dir", out);
        cfg.output_dir = out;
        p.finish();
    }
    root.finish();

    cfg.fusion.gap_frames = cfg.labels.gap_frames;
    validate(cfg);
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("<file>", "cannot open config " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("parse error: ") + e.what());
    }
    return parse_config(j);
}

void validate(const PipelineConfig& c) {
    require(c.scene.sample_rate > 0, "scene.sample_rate", "must be positive");
    require(c.scene.label_hop_s > 0, "scene.label_hop_s", "must be positive");
    const double hop = c.scene.sample_rate * c.scene.label_hop_s;
    require(std::abs(hop - std::round(hop)) < 1e-6, "scene.label_hop_s",
            "sample_rate * label_hop_s must be a whole number of samples");
    require(c.scene.count >= 1, "scene.count", "must be >= 1");
    const auto& g = c.scene.generator;
    require(g.duration_frames >= 1, "scene.generator.duration_frames", "must be >= 1");
    require(g.class_count >= 1, "scene.generator.class_count", "must be >= 1");
    require(g.min_sources >= 0, "scene.generator.min_sources", "must be >= 0");
    require(g.max_sources >= g.min_sources, "scene.generator.max_sources", "must be >= min_sources");
    require(g.min_event_frames >= 2, "scene.generator.min_event_frames", "must be >= 2");
    require(g.max_event_frames >= g.min_event_frames, "scene.generator.max_event_frames",
            "must be >= min_event_frames");
    require(g.min_event_frames <= g.duration_frames, "scene.generator.min_event_frames",
            "longer than the scene");
    require(g.moving_fraction >= 0 && g.moving_fraction <= 1, "scene.generator.moving_fraction", "must be in [0, 1]");
    require(g.min_speed_deg >= 0 && g.max_speed_deg >= g.min_speed_deg, "scene.generator.max_speed_deg",
            "needs 0 <= min_speed_deg <= max_speed_deg");
    require(g.max_elevation_deg >= 0 && g.max_elevation_deg <= 45, "scene.generator.max_elevation_deg",
            "must be in [0, 45]");

    const auto w = c.features.window_size;
    require(w >= 2 && (w & (w - 1)) == 0, "features.window_size", "must be a power of two");
    require(c.features.hop_size >= 1 && c.features.hop_size <= w, "features.hop_size", "must be in [1, window_size]");
    require(c.features.band_lo_hz >= 0, "features.band_lo_hz", "must be >= 0");
    require(c.features.band_hi_hz > c.features.band_lo_hz, "features.band_hi_hz", "must exceed band_lo_hz");
    require(c.features.band_hi_hz <= c.scene.sample_rate / 2, "features.band_hi_hz", "must not exceed Nyquist");
    (void)c.frames_per_label();

    require(c.labels.gap_frames >= 1, "labels.gap_frames", "must be >= 1");
    require(c.labels.static_threshold_deg > 0, "labels.static_threshold_deg", "must be positive");

    const auto& o = c.predictor.oracle;
    require(o.noise_sigma_deg >= 0, "predictor.oracle.noise_sigma_deg", "must be >= 0");
    require(o.outlier_sigma_deg >= 0, "predictor.oracle.outlier_sigma_deg", "must be >= 0");
    require(o.deriv_noise_scale >= 0, "predictor.oracle.deriv_noise_scale", "must be >= 0");
    require(o.outlier_rate >= 0 && o.outlier_rate <= 1, "predictor.oracle.outlier_rate", "must be in [0, 1]");
    const auto& r = c.predictor.regressor;
    require(r.hidden1 >= 1, "predictor.regressor.hidden1", "must be >= 1");
    require(r.hidden2 >= 1, "predictor.regressor.hidden2", "must be >= 1");
    require(r.state >= 1, "predictor.regressor.state", "must be >= 1");

    require(c.train.epochs >= 1, "train.epochs", "must be >= 1");
    require(c.train.batch_size >= 1, "train.batch_size", "must be >= 1");
    require(c.train.lr_initial > 0, "train.lr_initial", "must be positive");
    require(c.train.lr_final > 0, "train.lr_final", "must be positive");
    require(c.train.lr_decay_last_epochs >= 0 && c.train.lr_decay_last_epochs <= c.train.epochs,
            "train.lr_decay_last_epochs", "must be in [0, epochs]");
    require(c.train.beta1 >= 0 && c.train.beta1 < 1, "train.beta1", "must be in [0, 1)");
    require(c.train.beta2 >= 0 && c.train.beta2 < 1, "train.beta2", "must be in [0, 1)");
    require(c.train.epsilon > 0, "train.epsilon", "must be positive");
    require(c.validation_fraction >= 0 && c.validation_fraction < 1, "train.validation_fraction",
            "must be in [0, 1)");

    require(c.fusion.alpha >= 0 && c.fusion.alpha <= 1, "fusion.alpha", "must be in [0, 1]");
    require(c.metrics.threshold_deg > 0 && c.metrics.threshold_deg <= 180, "metrics.threshold_deg",
            "must be in (0, 180]");
    require(c.workers >= 1, "workers", "must be >= 1");
}

json to_json(const PipelineConfig& c) {
    json mics = json::array();
    for (const auto& p : c.geometry.mic_positions()) mics.push_back({p.x(), p.y(), p.z()});
    json signals = json::array();
    for (auto s : c.scene.generator.signals) signals.push_back(to_string(s));
    json sources = json::array();
    for (const auto& s : c.scene.sources) {
        json wps = json::array();
        for (const auto& w : s.waypoints) wps.push_back({w.frame, w.azimuth_deg, w.elevation_deg});
        sources.push_back({{"class", s.class_id}, {"track", s.track_id}, {"onset_frame", s.onset_frame},
                           {"offset_frame", s.offset_frame}, {"level_db", s.level_db},
                           {"signal", to_string(s.signal)}, {"waypoints", wps}});
    }
    const auto& g = c.scene.generator;
    return {
        {"geometry", {{"kind", "custom"}, {"mic_positions", mics},
                      {"reference_index", c.geometry.reference_index()},
                      {"speed_of_sound", c.geometry.speed_of_sound()}}},
        {"scene", {{"sample_rate", c.scene.sample_rate}, {"label_hop_s", c.scene.label_hop_s},
                   {"count", c.scene.count}, {"seed", c.scene.seed},
                   {"snr_db", c.scene.snr_db ? json(*c.scene.snr_db) : json(nullptr)},
                   {"noise_seed", c.scene.noise_seed},
                   {"generator", {{"duration_frames", g.duration_frames}, {"class_count", g.class_count},
                                  {"min_sources", g.min_sources}, {"max_sources", g.max_sources},
                                  {"min_event_frames", g.min_event_frames},
                                  {"max_event_frames", g.max_event_frames},
                                  {"moving_fraction", g.moving_fraction}, {"min_speed_deg", g.min_speed_deg},
                                  {"max_speed_deg", g.max_speed_deg},
                                  {"max_elevation_deg", g.max_elevation_deg}, {"signals", signals}}},
                   {"sources", sources}}},
        {"features", {{"window_size", c.features.window_size}, {"hop_size", c.features.hop_size},
                      {"band_lo_hz", c.features.band_lo_hz}, {"band_hi_hz", c.features.band_hi_hz}}},
        {"labels", {{"gap_frames", c.labels.gap_frames},
                    {"static_threshold_deg", c.labels.static_threshold_deg}}},
        {"predictor", {{"kind", c.predictor.kind == PredictorKind::Oracle ? "oracle" : "regressor"},
                       {"scale_with_snr", c.predictor.scale_with_snr},
                       {"init_seed", c.predictor.init_seed},
                       {"oracle", {{"noise_sigma_deg", c.predictor.oracle.noise_sigma_deg},
                                   {"outlier_rate", c.predictor.oracle.outlier_rate},
                                   {"outlier_sigma_deg", c.predictor.oracle.outlier_sigma_deg},
                                   {"deriv_noise_scale", c.predictor.oracle.deriv_noise_scale},
                                   {"seed", c.predictor.oracle.seed}}},
                       {"regressor", {{"hidden1", c.predictor.regressor.hidden1},
                                      {"hidden2", c.predictor.regressor.hidden2},
                                      {"state", c.predictor.regressor.state}}}}},
        {"train", {{"epochs", c.train.epochs}, {"batch_size", c.train.batch_size},
                   {"lr_initial", c.train.lr_initial}, {"lr_final", c.train.lr_final},
                   {"lr_decay_last_epochs", c.train.lr_decay_last_epochs}, {"beta1", c.train.beta1},
                   {"beta2", c.train.beta2}, {"epsilon", c.train.epsilon}, {"seed", c.train.seed},
                   {"validation_fraction", c.validation_fraction}}},
        {"fusion", {{"alpha", c.fusion.alpha}, {"recursive", c.fusion.recursive}}},
        {"metrics", {{"threshold_deg", c.metrics.threshold_deg},
                     {"pd_mode", c.metrics.pd_mode == PdMode::Pooled ? "pooled" : "per_recording"}}},
        {"workers", c.workers},
        {"paths", {{"output_dir", c.output_dir.string()}}},
    };
}

}  // namespace salsaloc
