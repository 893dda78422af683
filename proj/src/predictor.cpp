#include "salsaloc/predictor.hpp"
#include "salsaloc/errors.hpp"
#include "salsaloc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace salsaloc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec3 orthogonal_axis(const Vec3& v, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        Vec3 g(gauss(rng), gauss(rng), gauss(rng));
        g -= g.dot(v) * v;
        const double n = g.norm();
        if (n > 1e-6) return g / n;
    }
}

}  // namespace

PredictorOutput oracle_predict(const TrajectorySet& truth, const DerivativeLabels& derivatives,
                               const OracleConfig& config) {
    if (config.noise_sigma_deg < 0 || config.outlier_sigma_deg < 0 || config.deriv_noise_scale < 0)
        throw std::invalid_argument("oracle_predict: sigmas must be non-negative");
    if (!(config.outlier_rate >= 0.0 && config.outlier_rate <= 1.0))
        throw std::invalid_argument("oracle_predict: outlier_rate must be in [0, 1]");

    PredictorOutput out{truth.frame_count(), truth.class_count(), {}};
    Rng rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (const auto& [key, target] : select_targets(truth, derivatives)) {
        // Fixed number of draws per entry keeps streams aligned across settings.
        const bool outlier = unit(rng) < config.outlier_rate;
        const double sigma = outlier ? config.outlier_sigma_deg : config.noise_sigma_deg;
        const double angle = std::abs(gauss(rng)) * sigma * kDeg;
        const Vec3 axis = orthogonal_axis(target.doa, rng);
        const Vec3 noise(gauss(rng), gauss(rng), gauss(rng));

        Prediction p;
        p.doa = target.doa * std::cos(angle) + axis.cross(target.doa) * std::sin(angle);
        p.derivative = target.derivative + config.deriv_noise_scale * noise;
        out.entries.emplace(key, p);
    }
    return out;
}

double snr_scaled_sigma(double base_sigma_deg, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return base_sigma_deg;
    return base_sigma_deg * std::sqrt(1.0 + std::pow(10.0, -snr_db / 10.0));
}

double loss(const PredictorOutput& output, const std::map<ClassFrame, Target>& targets) {
    double total = 0.0;
    for (const auto& [key, target] : targets) {
        auto it = output.entries.find(key);
        if (it == output.entries.end())
            throw DataError("loss: no prediction for frame " + std::to_string(key.frame) +
                            ", class " + std::to_string(key.class_id));
        total += (target.doa - it->second.doa).squaredNorm() +
                 (target.derivative - it->second.derivative).squaredNorm();
    }
    return total;
}

double loss(const PredictorOutput& output, const TrajectorySet& truth,
            const DerivativeLabels& derivatives) {
    if (output.class_count != truth.class_count())
        throw DataError("loss: class count of predictions does not match truth");
    return loss(output, select_targets(truth, derivatives));
}

// ---------------------------------------------------------------------------

const char* block_name(Block b) {
    static constexpr const char* names[kBlockCount] = {"W1", "b1", "W2", "b2", "A",
                                                       "B",  "Wd", "bd", "Wv", "bv"};
    return names[static_cast<std::size_t>(b)];
}

RegressorParams RegressorParams::zeros(const RegressorShape& s) {
    if (s.input_dim <= 0 || s.hidden1 <= 0 || s.hidden2 <= 0 || s.state <= 0 || s.classes <= 0)
        throw std::invalid_argument("RegressorShape: all dimensions must be positive");
    RegressorParams p;
    p.shape = s;
    p.input_shift = Eigen::VectorXd::Zero(s.input_dim);
    p.input_scale = Eigen::VectorXd::Ones(s.input_dim);
    const int out = 3 * s.classes;
    p[Block::W1] = Eigen::MatrixXd::Zero(s.hidden1, s.input_dim);
    p[Block::b1] = Eigen::MatrixXd::Zero(s.hidden1, 1);
    p[Block::W2] = Eigen::MatrixXd::Zero(s.hidden2, s.hidden1);
    p[Block::b2] = Eigen::MatrixXd::Zero(s.hidden2, 1);
    p[Block::A] = Eigen::MatrixXd::Zero(s.state, s.state);
    p[Block::B] = Eigen::MatrixXd::Zero(s.state, s.hidden2);
    p[Block::Wd] = Eigen::MatrixXd::Zero(out, s.state);
    p[Block::bd] = Eigen::MatrixXd::Zero(out, 1);
    p[Block::Wv] = Eigen::MatrixXd::Zero(out, s.state);
    p[Block::bv] = Eigen::MatrixXd::Zero(out, 1);
    return p;
}

RegressorParams RegressorParams::random(const RegressorShape& shape, std::uint64_t seed) {
    RegressorParams p = zeros(shape);
    Rng rng(seed);
    for (auto& m : p.blocks) {
        if (m.cols() == 1) continue;  // biases stay zero
        const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u(rng);
    }
    // Keep the recurrence contractive at start.
    p[Block::A] *= 0.5;
    return p;
}

bool RegressorParams::all_finite() const {
    if (!input_shift.allFinite() || !input_scale.allFinite()) return false;
    return std::all_of(blocks.begin(), blocks.end(), [](const auto& m) { return m.allFinite(); });
}

Eigen::MatrixXd pool_features(const SalsaLiteFeature& features, std::size_t frames_per_label,
                              int label_frames) {
    if (frames_per_label == 0) throw std::invalid_argument("pool_features: frames_per_label is 0");
    const std::size_t C = features.channels(), T = features.frames(), F = features.freqs();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(label_frames, static_cast<Eigen::Index>(C * F));
    for (int l = 0; l < label_frames; ++l) {
        const std::size_t begin = static_cast<std::size_t>(l) * frames_per_label;
        const std::size_t end = std::min(T, begin + frames_per_label);
        if (begin >= end)
            throw DataError("pool_features: label frame " + std::to_string(l) +
                            " has no STFT frames");
        const double inv = 1.0 / static_cast<double>(end - begin);
        for (std::size_t t = begin; t < end; ++t)
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t f = 0; f < F; ++f)
                    out(l, static_cast<Eigen::Index>(c * F + f)) += inv * features.data(c, t, f);
    }
    return out;
}

namespace {

struct ForwardCache {
    std::vector<Eigen::VectorXd> x, h1, h2, s;
    Eigen::MatrixXd doa, deriv;
};

ForwardCache run_forward(const RegressorParams& p, const Eigen::MatrixXd& inputs) {
    const auto& s = p.shape;
    if (inputs.cols() != s.input_dim)
        throw DataError("regressor: input width " + std::to_string(inputs.cols()) +
                        " does not match parameter input_dim " + std::to_string(s.input_dim));
    const Eigen::Index L = inputs.rows();
    ForwardCache c;
    c.doa.resize(L, 3 * s.classes);
    c.deriv.resize(L, 3 * s.classes);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(s.state);
    for (Eigen::Index t = 0; t < L; ++t) {
        Eigen::VectorXd x = (inputs.row(t).transpose() - p.input_shift).cwiseProduct(p.input_scale);
        Eigen::VectorXd h1 = (p[Block::W1] * x + p[Block::b1]).array().tanh().matrix();
        Eigen::VectorXd h2 = (p[Block::W2] * h1 + p[Block::b2]).array().tanh().matrix();
        state = (p[Block::A] * state + p[Block::B] * h2).array().tanh().matrix();
        c.doa.row(t) = (p[Block::Wd] * state + p[Block::bd]).transpose();
        c.deriv.row(t) = (p[Block::Wv] * state + p[Block::bv]).transpose();
        c.x.push_back(std::move(x));
        c.h1.push_back(std::move(h1));
        c.h2.push_back(std::move(h2));
        c.s.push_back(state);
    }
    return c;
}

}  // namespace

RegressorOutputs regressor_forward(const RegressorParams& params, const Eigen::MatrixXd& inputs) {
    auto c = run_forward(params, inputs);
    return {std::move(c.doa), std::move(c.deriv)};
}

PredictorOutput regressor_predict(const RegressorParams& params, const SalsaLiteFeature& features,
                                  std::size_t frames_per_label, int label_frames, int class_count,
                                  const std::vector<ClassFrame>& active) {
    if (class_count != params.shape.classes)
        throw DataError("regressor_predict: class count does not match checkpoint");
    const auto outputs =
        regressor_forward(params, pool_features(features, frames_per_label, label_frames));
    PredictorOutput out{label_frames, class_count, {}};
    for (const auto& key : active) {
        if (key.frame < 0 || key.frame >= label_frames || key.class_id < 0 || key.class_id >= class_count)
            throw DataError("regressor_predict: active entry outside output range");
        Prediction p;
        p.doa = outputs.doa.row(key.frame).segment<3>(3 * key.class_id).transpose();
        p.derivative = outputs.derivative.row(key.frame).segment<3>(3 * key.class_id).transpose();
        out.entries.emplace(key, p);
    }
    return out;
}

Gradients zero_gradients(const RegressorParams& params) {
    Gradients g;
    for (std::size_t i = 0; i < kBlockCount; ++i)
        g[i] = Eigen::MatrixXd::Zero(params.blocks[i].rows(), params.blocks[i].cols());
    return g;
}

double sequence_loss(const RegressorParams& p, const TrainingSequence& seq, Gradients* grads,
                     double weight) {
    const auto c = run_forward(p, seq.inputs);
    const Eigen::Index L = seq.inputs.rows();
    const int out_dim = 3 * p.shape.classes;

    // Output residuals; zero where no target.
    Eigen::MatrixXd r_doa = Eigen::MatrixXd::Zero(L, out_dim);
    Eigen::MatrixXd r_der = Eigen::MatrixXd::Zero(L, out_dim);
    double total = 0.0;
    for (const auto& [key, target] : seq.targets) {
        if (key.frame < 0 || key.frame >= L || key.class_id < 0 || key.class_id >= p.shape.classes)
            throw DataError("sequence_loss: target outside output range");
        const Eigen::Vector3d ed = c.doa.row(key.frame).segment<3>(3 * key.class_id).transpose() - target.doa;
        const Eigen::Vector3d ev = c.deriv.row(key.frame).segment<3>(3 * key.class_id).transpose() - target.derivative;
        r_doa.row(key.frame).segment<3>(3 * key.class_id) = ed.transpose();
        r_der.row(key.frame).segment<3>(3 * key.class_id) = ev.transpose();
        total += ed.squaredNorm() + ev.squaredNorm();
    }
    if (!grads) return total;

    auto& g = *grads;
    auto G = [&](Block b) -> Eigen::MatrixXd& { return g[static_cast<std::size_t>(b)]; };
    Eigen::VectorXd g_state_next = Eigen::VectorXd::Zero(p.shape.state);
    for (Eigen::Index t = L - 1; t >= 0; --t) {
        const Eigen::VectorXd g_doa = 2.0 * weight * r_doa.row(t).transpose();
        const Eigen::VectorXd g_der = 2.0 * weight * r_der.row(t).transpose();
        const auto& s = c.s[static_cast<std::size_t>(t)];
        G(Block::Wd) += g_doa * s.transpose();
        G(Block::bd) += g_doa;
        G(Block::Wv) += g_der * s.transpose();
        G(Block::bv) += g_der;

        const Eigen::VectorXd g_state = p[Block::Wd].transpose() * g_doa +
                                        p[Block::Wv].transpose() * g_der + g_state_next;
        const Eigen::VectorXd g_z = g_state.cwiseProduct((1.0 - s.array().square()).matrix());
        const auto& h2 = c.h2[static_cast<std::size_t>(t)];
        if (t > 0) G(Block::A) += g_z * c.s[static_cast<std::size_t>(t - 1)].transpose();
        G(Block::B) += g_z * h2.transpose();
        g_state_next = p[Block::A].transpose() * g_z;

        const Eigen::VectorXd g_a2 =
            (p[Block::B].transpose() * g_z).cwiseProduct((1.0 - h2.array().square()).matrix());
        const auto& h1 = c.h1[static_cast<std::size_t>(t)];
        G(Block::W2) += g_a2 * h1.transpose();
        G(Block::b2) += g_a2;
        const Eigen::VectorXd g_a1 =
            (p[Block::W2].transpose() * g_a2).cwiseProduct((1.0 - h1.array().square()).matrix());
        G(Block::W1) += g_a1 * c.x[static_cast<std::size_t>(t)].transpose();
        G(Block::b1) += g_a1;
    }
    return total;
}

double batch_loss(const RegressorParams& params, const std::vector<const TrainingSequence*>& batch,
                  Gradients* grads) {
    if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
    const double w = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto* seq : batch) total += w * sequence_loss(params, *seq, grads, w);
    return total;
}

void fit_normalization(RegressorParams& params, const std::vector<TrainingSequence>& data) {
    const Eigen::Index D = params.shape.input_dim;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(D), sq = Eigen::VectorXd::Zero(D);
    double n = 0.0;
    for (const auto& seq : data) {
        if (seq.inputs.cols() != D) throw DataError("fit_normalization: input width mismatch");
        sum += seq.inputs.colwise().sum().transpose();
        n += static_cast<double>(seq.inputs.rows());
    }
    if (n == 0.0) throw std::invalid_argument("fit_normalization: no frames");
    const Eigen::VectorXd mean = sum / n;
    for (const auto& seq : data)
        sq += (seq.inputs.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
    params.input_shift = mean;
    params.input_scale.resize(D);
    for (Eigen::Index i = 0; i < D; ++i) {
        const double sd = std::sqrt(sq(i) / n);
        params.input_scale(i) = sd < 1e-8 ? 1.0 : 1.0 / sd;
    }
}

double learning_rate(const TrainConfig& config, double epoch) {
    const double decay_start = config.epochs - config.lr_decay_last_epochs;
    if (config.lr_decay_last_epochs <= 0 || epoch <= decay_start) return config.lr_initial;
    const double t = std::min(1.0, (epoch - decay_start) / config.lr_decay_last_epochs);
    return config.lr_initial + t * (config.lr_final - config.lr_initial);
}

namespace {

double mean_loss(const RegressorParams& p, const std::vector<TrainingSequence>& data) {
    double total = 0.0;
    for (const auto& seq : data) total += sequence_loss(p, seq);
    return total / static_cast<double>(data.size());
}

}  // namespace

TrainResult regressor_train(RegressorParams params, const std::vector<TrainingSequence>& train,
                            const TrainConfig& config,
                            const std::vector<TrainingSequence>& validation,
                            const std::function<void(const EpochStats&)>& on_epoch) {
    if (train.empty()) throw std::invalid_argument("regressor_train: empty training set");
    if (config.epochs <= 0 || config.batch_size <= 0)
        throw std::invalid_argument("regressor_train: epochs and batch_size must be positive");

    Rng rng(config.seed);
    Gradients m = zero_gradients(params), v = zero_gradients(params);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.params = params;
    std::optional<double> best_validation;
    long step = 0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = learning_rate(config, epoch);
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<const TrainingSequence*> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);

            Gradients g = zero_gradients(params);
            const double value = batch_loss(params, batch, &g);
            if (!std::isfinite(value)) {
                std::ostringstream msg;
                msg << "regressor_train: loss became " << value << " at epoch " << epoch
                    << ", step " << step << " (lr " << lr << ")";
                throw NumericError(msg.str());
            }
            ++step;
            const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            for (std::size_t b = 0; b < kBlockCount; ++b) {
                m[b] = config.beta1 * m[b] + (1.0 - config.beta1) * g[b];
                v[b] = config.beta2 * v[b] + (1.0 - config.beta2) * g[b].cwiseProduct(g[b]);
                params.blocks[b].array() -=
                    lr * (m[b].array() / c1) / ((v[b].array() / c2).sqrt() + config.epsilon);
            }
            if (!params.all_finite())
                throw NumericError("regressor_train: non-finite parameters at epoch " +
                                   std::to_string(epoch) + ", step " + std::to_string(step));
            epoch_loss += value;
            ++batches;
        }

        EpochStats stats{epoch, lr, epoch_loss / batches, std::nullopt};
        if (!validation.empty()) {
            stats.validation_loss = mean_loss(params, validation);
            if (!best_validation || *stats.validation_loss < *best_validation) {
                best_validation = stats.validation_loss;
                result.params = params;
                result.selected_epoch = epoch;
            }
        }
        result.curve.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    if (validation.empty()) {
        result.params = params;
        result.selected_epoch = config.epochs;
    }
    result.final_train_loss = mean_loss(result.params, train);
    return result;
}

}  // namespace salsaloc
