#pragma once

#include "salsaloc/labels.hpp"
#include "salsaloc/salsa.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace salsaloc {

/// Raw per-class estimates. Vectors are Cartesian and not normalized.
struct Prediction {
    Vec3 doa = Vec3::Zero();
    Vec3 derivative = Vec3::Zero();

    bool operator==(const Prediction& o) const { return doa == o.doa && derivative == o.derivative; }
};

/// One prediction per active (frame, class); activity comes from the
/// detection ground truth.
struct PredictorOutput {
    int frame_count = 0;
    int class_count = 0;
    std::map<ClassFrame, Prediction> entries;
};

// ---------------------------------------------------------------------------
// Noisy oracle

struct OracleConfig {
    double noise_sigma_deg = 0.0;
    double outlier_rate = 0.0;
    double outlier_sigma_deg = 0.0;
    double deriv_noise_scale = 0.0;
    std::uint64_t seed = 0;
};

/// Perturbs the ground truth. Each DOA is rotated by |N(0, sigma)| degrees
/// about a uniformly random axis orthogonal to it, so the angular error is
/// exactly that magnitude; with probability outlier_rate sigma is
/// outlier_sigma_deg. Derivatives get i.i.d. N(0, deriv_noise_scale^2) per
/// component. Throws std::invalid_argument for negative sigmas or a rate
/// outside [0, 1].
PredictorOutput oracle_predict(const TrajectorySet& truth, const DerivativeLabels& derivatives,
                               const OracleConfig& config);

/// Oracle angular noise for a recording at `snr_db`:
/// base * sqrt(1 + 10^(-snr/10)). Infinite SNR gives `base`.
double snr_scaled_sigma(double base_sigma_deg, double snr_db);

/// sum over active entries of |y - y_hat|^2 + |y' - y'_hat|^2. Throws
/// DataError when a target has no prediction or the class counts differ.
double loss(const PredictorOutput& output, const TrajectorySet& truth,
            const DerivativeLabels& derivatives);

/// Same sum against precomputed targets.
double loss(const PredictorOutput& output, const std::map<ClassFrame, Target>& targets);

// ---------------------------------------------------------------------------
// Two-head regressor

struct RegressorShape {
    int input_dim = 0;
    int hidden1 = 32;
    int hidden2 = 32;
    int state = 32;
    int classes = 12;

    bool operator==(const RegressorShape&) const = default;
};

enum class Block : std::size_t { W1, b1, W2, b2, A, B, Wd, bd, Wv, bv };
inline constexpr std::size_t kBlockCount = 10;
const char* block_name(Block b);

/// enc_t   = tanh(W2 tanh(W1 x_t + b1) + b2)
/// state_t = tanh(A state_{t-1} + B enc_t),  state_{-1} = 0
/// doa_t   = Wd state_t + bd,   deriv_t = Wv state_t + bv     (3C each)
/// x_t is standardized with the fixed (non-trained) input_shift/input_scale.
struct RegressorParams {
    RegressorShape shape;
    Eigen::VectorXd input_shift;
    Eigen::VectorXd input_scale;
    std::array<Eigen::MatrixXd, kBlockCount> blocks;

    Eigen::MatrixXd& operator[](Block b) { return blocks[static_cast<std::size_t>(b)]; }
    const Eigen::MatrixXd& operator[](Block b) const { return blocks[static_cast<std::size_t>(b)]; }

    static RegressorParams zeros(const RegressorShape& shape);
    /// Uniform Glorot initialization, zero biases.
    static RegressorParams random(const RegressorShape& shape, std::uint64_t seed);

    bool all_finite() const;
};

/// Mean-pools STFT frames to label-frame rate and flattens channels x freqs.
/// Row l averages STFT frames [l*k, (l+1)*k) with k = frames_per_label.
/// Throws DataError if a label frame has no STFT frame.
Eigen::MatrixXd pool_features(const SalsaLiteFeature& features, std::size_t frames_per_label,
                              int label_frames);

struct RegressorOutputs {
    Eigen::MatrixXd doa;         ///< L x 3C
    Eigen::MatrixXd derivative;  ///< L x 3C
};

/// Forward pass over pooled inputs (L x input_dim). Throws DataError on a
/// dimension mismatch.
RegressorOutputs regressor_forward(const RegressorParams& params, const Eigen::MatrixXd& inputs);

/// Forward pass on features, keeping only frames/classes listed in `active`.
PredictorOutput regressor_predict(const RegressorParams& params, const SalsaLiteFeature& features,
                                  std::size_t frames_per_label, int label_frames, int class_count,
                                  const std::vector<ClassFrame>& active);

struct TrainingSequence {
    Eigen::MatrixXd inputs;                 ///< L x input_dim
    std::map<ClassFrame, Target> targets;   ///< loss is taken over these
};

using Gradients = std::array<Eigen::MatrixXd, kBlockCount>;

/// Loss of one sequence and, if `grads` is given, its gradient accumulated
/// into it (scaled by `weight`) via backpropagation through time.
double sequence_loss(const RegressorParams& params, const TrainingSequence& seq,
                     Gradients* grads = nullptr, double weight = 1.0);

Gradients zero_gradients(const RegressorParams& params);

/// Mean over sequences of sequence_loss: the per-batch objective.
double batch_loss(const RegressorParams& params, const std::vector<const TrainingSequence*>& batch,
                  Gradients* grads = nullptr);

/// Sets input_shift/input_scale to the per-dimension mean and 1/std over all
/// frames of `data` (scale 1 where std < 1e-8).
void fit_normalization(RegressorParams& params, const std::vector<TrainingSequence>& data);

struct TrainConfig {
    int epochs = 70;
    int batch_size = 32;
    double lr_initial = 3e-4;
    double lr_final = 1e-4;
    int lr_decay_last_epochs = 15;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
};

/// Learning rate for 1-based `epoch`: lr_initial up to epochs - decay, then
/// linear down to lr_final at `epochs`. Accepts fractional epochs.
double learning_rate(const TrainConfig& config, double epoch);

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;                ///< mean batch loss during the epoch
    std::optional<double> validation_loss;  ///< mean sequence loss after the epoch
};

struct TrainResult {
    RegressorParams params;  ///< best validation epoch, else final
    std::vector<EpochStats> curve;
    int selected_epoch = 0;
    double final_train_loss = 0.0;  ///< mean sequence loss of `params` on the training set
};

/// Adam on the batch objective with the linear-decay schedule. Batches are
/// reshuffled every epoch from `config.seed`. Throws std::invalid_argument for
/// an empty dataset, NumericError if the loss or parameters turn non-finite.
TrainResult regressor_train(RegressorParams params, const std::vector<TrainingSequence>& train,
                            const TrainConfig& config,
                            const std::vector<TrainingSequence>& validation = {},
                            const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace salsaloc
