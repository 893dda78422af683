#include "cli.hpp"
#include "plot.hpp"

#include "salsaloc/audio.hpp"
#include "salsaloc/config.hpp"
#include "salsaloc/errors.hpp"
#include "salsaloc/io.hpp"
#include "salsaloc/random.hpp"
#include "salsaloc/scene.hpp"
#include "salsaloc/store.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

namespace salsaloc::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::span<const char> bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

namespace {

std::uint64_t fnv1a(const std::string& s) { return cli::fnv1a(std::span<const char>(s.data(), s.size())); }

/// Recording name shared by all files of one scene: the file stem without
/// a trailing role suffix.
std::string base_name(const fs::path& p) {
    std::string s = p.stem().string();
    for (const char* suffix : {"_truth", "_deriv", "_pred", "_fused", "_trajectory"}) {
        const std::string suf = suffix;
        if (s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0)
            return s.substr(0, s.size() - suf.size());
    }
    return s;
}

struct Context {
    PipelineConfig config;
    std::string config_hash;
    std::ostream& out;
    std::mutex out_mutex;

    void say(const std::string& line) {
        std::lock_guard lock(out_mutex);
        out << line << '\n';
    }

    /// "manifest config=<hash> inputs=<name>:<hash>;..." for CSV headers.
    std::string manifest(const std::vector<fs::path>& inputs) const {
        std::string s = "manifest config=" + config_hash + " inputs=";
        if (inputs.empty()) s += "-";
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const auto bytes = read_file_bytes(inputs[i]);
            s += (i ? ";" : "") + inputs[i].filename().string() + ":" + hex64(cli::fnv1a(bytes));
        }
        return s;
    }
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Every output
/// depends only on its index, so results do not depend on scheduling. The
/// failure with the lowest index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// parallel_for whose per-item status lines are printed in index order.
template <typename Fn>
void parallel_report(Context& ctx, std::size_t n, int workers, Fn&& fn) {
    std::vector<std::string> lines(n);
    parallel_for(n, workers, [&](std::size_t i) { lines[i] = fn(i); });
    for (const auto& l : lines) ctx.say(l);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& p) {
    if (!fs::is_regular_file(p)) throw DataError("missing input file " + p.string());
}

/// Truth CSV with the class count widened to the configured one.
TrajectorySet load_truth(const fs::path& p, const PipelineConfig& cfg) {
    require_file(p);
    TrajectorySet t = ingest_metadata(p);
    if (t.class_count() > cfg.class_count())
        throw DataError(fmt::format("{}: class {} exceeds configured class_count {}", p.string(),
                                    t.class_count() - 1, cfg.class_count()));
    t.set_class_count(cfg.class_count());
    return t;
}

bool is_prediction_file(const std::string& text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') return line == kPredictionHeader;
        pos = end + 1;
    }
    return false;
}

/// Estimates to score: raw prediction CSVs are normalized, metadata CSVs
/// (fused output) are read as is.
TrajectorySet load_estimates(const fs::path& p, const PipelineConfig& cfg) {
    require_file(p);
    const std::string text = read_text_file(p);
    TrajectorySet t = is_prediction_file(text) ? raw_trajectories(parse_predictions(text, p.string()))
                                               : parse_metadata(text, p.string());
    if (t.class_count() > cfg.class_count())
        throw DataError(fmt::format("{}: class {} exceeds configured class_count {}", p.string(),
                                    t.class_count() - 1, cfg.class_count()));
    t.set_class_count(cfg.class_count());
    return t;
}

std::vector<ClassFrame> active_pairs(const TrajectorySet& truth) {
    std::vector<ClassFrame> out;
    for (const auto& [k, n] : truth.class_activity()) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    fs::path out_dir;
};

void cmd_simulate(Context& ctx, const SimulateArgs& a) {
    const auto& cfg = ctx.config;
    ensure_dir(a.out_dir);
    const std::string manifest = ctx.manifest({});
    parallel_report(ctx, static_cast<std::size_t>(cfg.scene.count), cfg.workers, [&](std::size_t i) -> std::string {
        const std::uint64_t seed = derive_seed(cfg.scene.seed, i);
        SceneSpec spec;
        if (cfg.scene.sources.empty()) {
            spec = generate_scene(cfg.scene.generator, cfg.geometry, seed);
        } else {
            spec.sources = cfg.scene.sources;
            spec.duration_frames = cfg.scene.generator.duration_frames;
            spec.class_count = cfg.scene.generator.class_count;
        }
        spec.geometry = cfg.geometry;
        spec.sample_rate = cfg.scene.sample_rate;
        spec.label_hop_s = cfg.scene.label_hop_s;
        spec.seed = seed;
        RenderedScene scene = render(spec);
        if (cfg.scene.snr_db) scene.audio = add_awgn(scene.audio, *cfg.scene.snr_db, derive_seed(cfg.scene.noise_seed, i));

        const std::string name = fmt::format("scene_{:03d}", i);
        const fs::path wav = a.out_dir / (name + ".wav");
        write_wav(wav, scene.audio);
        write_text_file(a.out_dir / (name + "_truth.csv"), format_metadata(scene.truth, {manifest}));
        write_text_file(a.out_dir / (name + "_deriv.csv"),
                        format_derivatives(scene.truth, derivative_ground_truth(scene.truth, cfg.labels.gap_frames),
                                           {manifest}));
        return fmt::format("{} sources={} entries={}", wav.string(), spec.sources.size(), scene.truth.size());
    });
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
    std::vector<fs::path> inputs;
    fs::path out_dir;
};

void cmd_extract(Context& ctx, const ExtractArgs& a) {
    const auto& cfg = ctx.config;
    ensure_dir(a.out_dir);
    parallel_report(ctx, a.inputs.size(), cfg.workers, [&](std::size_t i) -> std::string {
        require_file(a.inputs[i]);
        const MultichannelAudio audio = read_wav(a.inputs[i]);
        if (audio.sample_rate != cfg.scene.sample_rate)
            throw DataError(fmt::format("{}: sample rate {} differs from configured {}", a.inputs[i].string(),
                                        audio.sample_rate, cfg.scene.sample_rate));
        if (static_cast<std::size_t>(audio.channels()) != cfg.geometry.mic_count())
            throw DataError(fmt::format("{}: {} channels but the array has {} microphones", a.inputs[i].string(),
                                        audio.channels(), cfg.geometry.mic_count()));
        const SalsaLiteFeature f = extract(audio, cfg.geometry, cfg.features);
        const fs::path out = a.out_dir / (base_name(a.inputs[i]) + ".slt");
        save_features(out, f);
        return fmt::format("{} channels={} frames={} freqs={}", out.string(), f.channels(), f.frames(),
                            f.freqs());
    });
}

// ---------------------------------------------------------------------------

struct PredictArgs {
    std::vector<fs::path> truth;
    fs::path out_dir;
    fs::path features_dir;
    fs::path checkpoint;
};

void cmd_predict(Context& ctx, const PredictArgs& a) {
    const auto& cfg = ctx.config;
    ensure_dir(a.out_dir);
    std::optional<RegressorParams> params;
    if (cfg.predictor.kind == PredictorKind::Regressor) {
        if (a.checkpoint.empty()) throw ConfigError("checkpoint", "required for predictor.kind=regressor");
        if (a.features_dir.empty()) throw ConfigError("features-dir", "required for predictor.kind=regressor");
        require_file(a.checkpoint);
        params = load_checkpoint(a.checkpoint);
        if (params->shape.classes != cfg.class_count())
            throw DataError(fmt::format("checkpoint predicts {} classes, config has {}", params->shape.classes,
                                        cfg.class_count()));
    }
    OracleConfig oracle = cfg.predictor.oracle;
    if (cfg.predictor.scale_with_snr && cfg.scene.snr_db)
        oracle.noise_sigma_deg = snr_scaled_sigma(oracle.noise_sigma_deg, *cfg.scene.snr_db);

    parallel_report(ctx, a.truth.size(), cfg.workers, [&](std::size_t i) -> std::string {
        const std::string base = base_name(a.truth[i]);
        const TrajectorySet truth = load_truth(a.truth[i], cfg);
        std::vector<fs::path> inputs{a.truth[i]};
        PredictorOutput pred;
        if (params) {
            const fs::path feat_path = a.features_dir / (base + ".slt");
            require_file(feat_path);
            const SalsaLiteFeature f = load_features(feat_path);
            pred = regressor_predict(*params, f, cfg.frames_per_label(), truth.frame_count(), cfg.class_count(),
                                     active_pairs(truth));
            inputs.push_back(feat_path);
            inputs.push_back(a.checkpoint);
        } else {
            OracleConfig o = oracle;
            o.seed = derive_seed(oracle.seed, fnv1a(base));
            pred = oracle_predict(truth, derivative_ground_truth(truth, cfg.labels.gap_frames), o);
        }
        const fs::path out = a.out_dir / (base + "_pred.csv");
        write_text_file(out, format_predictions(pred, {ctx.manifest(inputs)}));
        return fmt::format("{} entries={}", out.string(), pred.entries.size());
    });
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    fs::path data_dir;
    fs::path truth_dir;
    fs::path checkpoint;
    fs::path curve;
};

void cmd_train(Context& ctx, const TrainArgs& a) {
    const auto& cfg = ctx.config;
    const fs::path truth_dir = a.truth_dir.empty() ? a.data_dir : a.truth_dir;
    if (!fs::is_directory(a.data_dir)) throw DataError("missing data directory " + a.data_dir.string());
    std::vector<fs::path> feature_files;
    for (const auto& e : fs::directory_iterator(a.data_dir))
        if (e.is_regular_file() && e.path().extension() == ".slt") feature_files.push_back(e.path());
    std::sort(feature_files.begin(), feature_files.end());
    if (feature_files.empty()) throw DataError("no .slt feature files in " + a.data_dir.string());

    std::vector<TrainingSequence> seqs(feature_files.size());
    std::vector<fs::path> inputs;
    std::optional<int> input_dim;
    parallel_for(feature_files.size(), cfg.workers, [&](std::size_t i) {
        const fs::path truth_path = truth_dir / (base_name(feature_files[i]) + "_truth.csv");
        const TrajectorySet truth = load_truth(truth_path, cfg);
        seqs[i] = make_sequence(load_features(feature_files[i]), truth, cfg.frames_per_label(),
                                cfg.labels.gap_frames);
    });
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const int d = static_cast<int>(seqs[i].inputs.cols());
        if (input_dim && *input_dim != d)
            throw DataError(fmt::format("{}: input dimension {} differs from {}", feature_files[i].string(), d,
                                        *input_dim));
        input_dim = d;
        inputs.push_back(feature_files[i]);
        inputs.push_back(truth_dir / (base_name(feature_files[i]) + "_truth.csv"));
    }

    const std::size_t n_val = static_cast<std::size_t>(std::ceil(cfg.validation_fraction * seqs.size()));
    if (n_val >= seqs.size()) throw ConfigError("train.validation_fraction", "leaves no training recordings");
    std::vector<TrainingSequence> validation(std::make_move_iterator(seqs.end() - n_val),
                                             std::make_move_iterator(seqs.end()));
    seqs.resize(seqs.size() - n_val);

    RegressorShape shape = cfg.predictor.regressor;
    shape.input_dim = *input_dim;
    shape.classes = cfg.class_count();
    RegressorParams params = RegressorParams::random(shape, cfg.predictor.init_seed);
    fit_normalization(params, seqs);

    TrainResult result = regressor_train(std::move(params), seqs, cfg.train, validation, [&](const EpochStats& s) {
        ctx.say(fmt::format("epoch {} lr={:.6g} train_loss={:.6f}{}", s.epoch, s.lr, s.train_loss,
                            s.validation_loss ? fmt::format(" validation_loss={:.6f}", *s.validation_loss) : ""));
    });

    if (a.checkpoint.has_parent_path()) ensure_dir(a.checkpoint.parent_path());
    save_checkpoint(a.checkpoint, result.params);
    std::string curve = "# " + ctx.manifest(inputs) + "\nepoch,lr,train_loss,validation_loss\n";
    for (const auto& s : result.curve)
        curve += fmt::format("{},{:.9g},{:.9f},{}\n", s.epoch, s.lr, s.train_loss,
                             s.validation_loss ? fmt::format("{:.9f}", *s.validation_loss) : "");
    const fs::path curve_path =
        a.curve.empty() ? fs::path(fs::path(a.checkpoint).replace_extension("").string() + "_curve.csv") : a.curve;
    write_text_file(curve_path, curve);
    ctx.say(fmt::format("{} selected_epoch={} final_train_loss={:.6f}", a.checkpoint.string(),
                        result.selected_epoch, result.final_train_loss));
}

// ---------------------------------------------------------------------------

struct FuseArgs {
    std::vector<fs::path> inputs;
    fs::path out_dir;
    fs::path truth_dir;
};

void cmd_fuse(Context& ctx, const FuseArgs& a) {
    const auto& cfg = ctx.config;
    ensure_dir(a.out_dir);
    parallel_report(ctx, a.inputs.size(), cfg.workers, [&](std::size_t i) -> std::string {
        require_file(a.inputs[i]);
        const std::string base = base_name(a.inputs[i]);
        const PredictorOutput pred = parse_predictions(read_text_file(a.inputs[i]), a.inputs[i].string());
        const TrajectorySet fused = fuse(pred, cfg.fusion);
        const fs::path out = a.out_dir / (base + "_fused.csv");
        write_text_file(out, format_metadata(fused, {ctx.manifest({a.inputs[i]})}));
        if (!a.truth_dir.empty()) {
            const fs::path truth_path = a.truth_dir / (base + "_truth.csv");
            const TrajectorySet truth = load_truth(truth_path, cfg);
            write_text_file(a.out_dir / (base + "_trajectory.csv"),
                            format_trajectory_report(fuse_report(pred, fused, truth),
                                                     {ctx.manifest({a.inputs[i], truth_path})}));
        }
        return fmt::format("{} entries={}", out.string(), fused.size());
    });
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::vector<fs::path> inputs;
    fs::path truth_dir;
    fs::path out;
    std::string model = "model";
    std::string condition = "-";
};

void cmd_eval(Context& ctx, const EvalArgs& a) {
    const auto& cfg = ctx.config;
    std::vector<EvalReport> reports(a.inputs.size());
    std::vector<fs::path> truth_paths(a.inputs.size());
    parallel_for(a.inputs.size(), cfg.workers, [&](std::size_t i) {
        truth_paths[i] = a.truth_dir / (base_name(a.inputs[i]) + "_truth.csv");
        TrajectorySet truth = load_truth(truth_paths[i], cfg);
        const TrajectorySet est = load_estimates(a.inputs[i], cfg);
        truth.set_frame_count(std::max(truth.frame_count(), est.frame_count()));
        reports[i] = evaluate(est, truth, classify_static_moving(truth, cfg.labels.static_threshold_deg),
                              cfg.metrics.threshold_deg);
    });
    const EvalReport total = aggregate(reports, cfg.metrics.pd_mode);
    ctx.say(format_table({{a.model, total}}, a.condition));
    if (!a.out.empty()) {
        std::vector<fs::path> inputs;
        for (std::size_t i = 0; i < a.inputs.size(); ++i) {
            inputs.push_back(a.inputs[i]);
            inputs.push_back(truth_paths[i]);
        }
        if (a.out.has_parent_path()) ensure_dir(a.out.parent_path());
        write_text_file(a.out, format_report_csv(total, {ctx.manifest(inputs),
                                                         "model=" + a.model + " condition=" + a.condition}));
    }
}

// ---------------------------------------------------------------------------

struct PlotArgs {
    fs::path truth;
    fs::path raw;
    fs::path fused;
    fs::path out_dir;
};

void cmd_plot(Context& ctx, const PlotArgs& a) {
    const auto& cfg = ctx.config;
    ensure_dir(a.out_dir);
    TrajectorySet truth = load_truth(a.truth, cfg);
    const TrajectorySet raw = load_estimates(a.raw, cfg);
    std::optional<TrajectorySet> fused;
    if (!a.fused.empty()) fused = load_estimates(a.fused, cfg);
    truth.set_frame_count(std::max({truth.frame_count(), raw.frame_count(), fused ? fused->frame_count() : 0}));
    const auto motion = classify_static_moving(truth, cfg.labels.static_threshold_deg);

    std::set<int> classes;
    for (const auto& [k, d] : truth.entries()) classes.insert(k.class_id);
    for (const auto& [k, d] : raw.entries()) classes.insert(k.class_id);
    for (int c : classes) {
        const fs::path out = a.out_dir / fmt::format("class_{:02d}.svg", c);
        write_text_file(out, class_svg(c, truth, &raw, fused ? &*fused : nullptr));
        ctx.say(out.string());
    }
    const EvalReport raw_report = evaluate(raw, truth, motion, cfg.metrics.threshold_deg);
    std::optional<EvalReport> fused_report;
    if (fused) fused_report = evaluate(*fused, truth, motion, cfg.metrics.threshold_deg);
    const fs::path out = a.out_dir / "classwise_mae.svg";
    write_text_file(out, mae_svg(raw_report, fused_report ? &*fused_report : nullptr, cfg.class_count(),
                                 cfg.metrics.threshold_deg));
    ctx.say(out.string());
}

// ---------------------------------------------------------------------------

void print_error(std::ostream& err, int code, const std::string& kind, const std::string& message,
                 const std::string& key = {}) {
    nlohmann::json j{{"error", kind}, {"exit_code", code}, {"message", message}};
    if (!key.empty()) j["key"] = key;
    err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sound event localization pipeline: simulate, extract, predict, train, fuse, eval, plot"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::optional<int> workers;
    app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("-j,--workers", workers, "worker threads");

    std::optional<int> count;
    std::optional<std::uint64_t> seed;
    std::optional<double> snr;
    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "render random or configured scenes to WAV + label CSVs");
    sim->add_option("-o,--out-dir", sim_args.out_dir, "output directory")->required();
    sim->add_option("--count", count, "number of scenes");
    sim->add_option("--seed", seed, "scene seed");
    sim->add_option("--snr", snr, "add white noise at this SNR (dB)");

    ExtractArgs ext_args;
    auto* ext = app.add_subcommand("extract", "compute SALSA-Lite features from WAV files");
    ext->add_option("inputs", ext_args.inputs, "WAV files")->required();
    ext->add_option("-o,--out-dir", ext_args.out_dir, "output directory")->required();

    PredictArgs pred_args;
    std::optional<std::uint64_t> oracle_seed;
    std::optional<double> pred_snr;
    auto* pred = app.add_subcommand("predict", "DOA + derivative estimates for active (frame, class) pairs");
    pred->add_option("truth", pred_args.truth, "ground-truth metadata CSVs (activity source)")->required();
    pred->add_option("-o,--out-dir", pred_args.out_dir, "output directory")->required();
    pred->add_option("--features-dir", pred_args.features_dir, "feature files (regressor)");
    pred->add_option("--checkpoint", pred_args.checkpoint, "regressor checkpoint");
    pred->add_option("--seed", oracle_seed, "oracle seed");
    pred->add_option("--snr", pred_snr, "recording SNR (dB) for oracle noise scaling");

    TrainArgs train_args;
    std::optional<int> epochs;
    auto* train = app.add_subcommand("train", "train the regressor on feature + truth files");
    train->add_option("--data", train_args.data_dir, "directory of <name>.slt feature files")->required();
    train->add_option("--truth-dir", train_args.truth_dir, "directory of <name>_truth.csv (default: --data)");
    train->add_option("-o,--checkpoint", train_args.checkpoint, "checkpoint output")->required();
    train->add_option("--curve", train_args.curve, "loss curve CSV");
    train->add_option("--epochs", epochs, "epochs");

    FuseArgs fuse_args;
    std::optional<double> alpha;
    bool recursive = false;
    auto* fus = app.add_subcommand("fuse", "fuse DOAs with derivatives");
    fus->add_option("inputs", fuse_args.inputs, "prediction CSVs")->required();
    fus->add_option("-o,--out-dir", fuse_args.out_dir, "output directory")->required();
    fus->add_option("--truth-dir", fuse_args.truth_dir, "write per-frame trajectory reports against truth");
    fus->add_option("--alpha", alpha, "weight on the current raw DOA");
    fus->add_flag("--recursive", recursive, "update from the previous fused estimate");

    EvalArgs eval_args;
    std::optional<double> threshold;
    std::string pd_mode;
    auto* ev = app.add_subcommand("eval", "detection/localization metrics");
    ev->add_option("inputs", eval_args.inputs, "prediction or fused CSVs")->required();
    ev->add_option("--truth-dir", eval_args.truth_dir, "directory of <name>_truth.csv")->required();
    ev->add_option("-o,--out", eval_args.out, "report CSV");
    ev->add_option("--model", eval_args.model, "model label for the table");
    ev->add_option("--condition", eval_args.condition, "condition label (e.g. SNR)");
    ev->add_option("--threshold", threshold, "DOA error threshold (deg)");
    ev->add_option("--pd-mode", pd_mode, "pooled | per_recording");

    PlotArgs plot_args;
    auto* plt = app.add_subcommand("plot", "SVG trajectories per class and classwise MAE bars");
    plt->add_option("--truth", plot_args.truth, "truth metadata CSV")->required();
    plt->add_option("--raw", plot_args.raw, "prediction CSV")->required();
    plt->add_option("--fused", plot_args.fused, "fused CSV");
    plt->add_option("-o,--out-dir", plot_args.out_dir, "output directory")->required();

    try {
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        if (argv.empty()) argv.push_back("salsaloc");
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        print_error(err, kConfigError, "usage", e.what());
        return kConfigError;
    }

    try {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (workers) cfg.workers = *workers;
        if (count) cfg.scene.count = *count;
        if (seed) cfg.scene.seed = *seed;
        if (snr) cfg.scene.snr_db = *snr;
        if (pred_snr) cfg.scene.snr_db = *pred_snr;
        if (oracle_seed) cfg.predictor.oracle.seed = *oracle_seed;
        if (epochs) cfg.train.epochs = *epochs;
        if (alpha) cfg.fusion.alpha = *alpha;
        if (recursive) cfg.fusion.recursive = true;
        if (threshold) cfg.metrics.threshold_deg = *threshold;
        if (!pd_mode.empty()) {
            if (pd_mode == "pooled")
                cfg.metrics.pd_mode = PdMode::Pooled;
            else if (pd_mode == "per_recording")
                cfg.metrics.pd_mode = PdMode::PerRecording;
            else
                throw ConfigError("metrics.pd_mode", "expected 'pooled' or 'per_recording'");
        }
        validate(cfg);

        // Thread count and paths do not change results, so they stay out of the hash.
        nlohmann::json hashed = to_json(cfg);
        hashed.erase("workers");
        hashed.erase("paths");
        Context ctx{cfg, hex64(fnv1a(hashed.dump())), out, {}};
        if (*sim) cmd_simulate(ctx, sim_args);
        if (*ext) cmd_extract(ctx, ext_args);
        if (*pred) cmd_predict(ctx, pred_args);
        if (*train) cmd_train(ctx, train_args);
        if (*fus) cmd_fuse(ctx, fuse_args);
        if (*ev) cmd_eval(ctx, eval_args);
        if (*plt) cmd_plot(ctx, plot_args);
        return kOk;
    } catch (const ConfigError& e) {
        print_error(err, kConfigError, "config", e.what(), e.key());
        return kConfigError;
    } catch (const DataError& e) {
        print_error(err, kDataError, "data", e.what());
        return kDataError;
    } catch (const NumericError& e) {
        print_error(err, kNumericError, "numeric", e.what());
        return kNumericError;
    } catch (const std::invalid_argument& e) {
        print_error(err, kDataError, "data", e.what());
        return kDataError;
    } catch (const fs::filesystem_error& e) {
        print_error(err, kDataError, "data", e.what());
        return kDataError;
    } catch (const std::exception& e) {
        print_error(err, kFailure, "internal", e.what());
        return kFailure;
    }
}

}  // namespace salsaloc::cli
