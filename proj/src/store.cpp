#include "salsaloc/store.hpp"
#include "salsaloc/errors.hpp"

#include <cmath>

namespace salsaloc {

namespace {

Tensor vector_tensor(const std::vector<double>& v) { return Tensor({v.size()}, v); }

Tensor matrix_tensor(const Eigen::MatrixXd& m) {
    Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    auto d = t.data();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) d[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return t;
}

Eigen::MatrixXd tensor_matrix(const Tensor& t, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    const bool vec_ok = t.rank() == 1 && cols == 1 && t.dim(0) == static_cast<std::size_t>(rows);
    const bool mat_ok = t.rank() == 2 && t.dim(0) == static_cast<std::size_t>(rows) &&
                        t.dim(1) == static_cast<std::size_t>(cols);
    if (!vec_ok && !mat_ok) throw DataError("checkpoint entry " + name + " has the wrong shape");
    Eigen::MatrixXd m(rows, cols);
    auto d = t.data();
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = d[static_cast<std::size_t>(i * cols + j)];
    return m;
}

std::size_t as_count(double v, const std::string& what) {
    if (!std::isfinite(v) || v < 0 || v != std::floor(v)) throw DataError(what + " is not a count");
    return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<NamedTensor> feature_entries(const SalsaLiteFeature& f) {
    return {
        {"features", f.data, DType::F32},
        {"freqs_hz", vector_tensor(f.freqs_hz), DType::F64},
        {"meta",
         vector_tensor({static_cast<double>(f.log_power_channels), static_cast<double>(f.first_bin), f.band_lo_hz,
                        f.band_hi_hz, static_cast<double>(f.hop_size), f.sample_rate}),
         DType::F64},
    };
}

SalsaLiteFeature features_from_entries(const std::vector<NamedTensor>& entries) {
    SalsaLiteFeature f;
    f.data = find_entry(entries, "features").tensor;
    if (f.data.rank() != 3) throw DataError("features entry must have rank 3");
    const auto& freqs = find_entry(entries, "freqs_hz").tensor;
    const auto& meta = find_entry(entries, "meta").tensor;
    if (meta.rank() != 1 || meta.size() != 6) throw DataError("meta entry must hold 6 values");
    if (freqs.rank() != 1 || freqs.size() != f.freqs()) throw DataError("freqs_hz does not match features");
    f.freqs_hz.assign(freqs.data().begin(), freqs.data().end());
    auto m = meta.data();
    f.log_power_channels = as_count(m[0], "log_power_channels");
    f.first_bin = as_count(m[1], "first_bin");
    f.band_lo_hz = m[2];
    f.band_hi_hz = m[3];
    f.hop_size = as_count(m[4], "hop_size");
    f.sample_rate = m[5];
    if (f.log_power_channels < 2 || f.channels() != 2 * f.log_power_channels - 1)
        throw DataError("feature channel count does not match 2M-1");
    return f;
}

void save_features(const std::filesystem::path& path, const SalsaLiteFeature& features) {
    write_container_file(path, feature_entries(features));
}

SalsaLiteFeature load_features(const std::filesystem::path& path) {
    try {
        return features_from_entries(read_container_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<NamedTensor> checkpoint_entries(const RegressorParams& p) {
    const auto& s = p.shape;
    std::vector<NamedTensor> out;
    out.push_back({"meta.shape",
                   vector_tensor({double(s.input_dim), double(s.hidden1), double(s.hidden2), double(s.state),
                                  double(s.classes)}),
                   DType::F64});
    out.push_back({"input_shift", matrix_tensor(p.input_shift), DType::F64});
    out.push_back({"input_scale", matrix_tensor(p.input_scale), DType::F64});
    for (std::size_t b = 0; b < kBlockCount; ++b)
        out.push_back({block_name(static_cast<Block>(b)), matrix_tensor(p.blocks[b]), DType::F64});
    return out;
}

RegressorParams params_from_entries(const std::vector<NamedTensor>& entries) {
    const auto& meta = find_entry(entries, "meta.shape").tensor;
    if (meta.rank() != 1 || meta.size() != 5) throw DataError("meta.shape must hold 5 values");
    auto m = meta.data();
    RegressorShape shape{static_cast<int>(as_count(m[0], "input_dim")), static_cast<int>(as_count(m[1], "hidden1")),
                         static_cast<int>(as_count(m[2], "hidden2")), static_cast<int>(as_count(m[3], "state")),
                         static_cast<int>(as_count(m[4], "classes"))};
    RegressorParams p = RegressorParams::zeros(shape);
    p.input_shift = tensor_matrix(find_entry(entries, "input_shift").tensor, shape.input_dim, 1, "input_shift");
    p.input_scale = tensor_matrix(find_entry(entries, "input_scale").tensor, shape.input_dim, 1, "input_scale");
    for (std::size_t b = 0; b < kBlockCount; ++b) {
        const std::string name = block_name(static_cast<Block>(b));
        p.blocks[b] = tensor_matrix(find_entry(entries, name).tensor, p.blocks[b].rows(), p.blocks[b].cols(), name);
    }
    if (!p.all_finite()) throw DataError("checkpoint holds non-finite parameters");
    return p;
}

void save_checkpoint(const std::filesystem::path& path, const RegressorParams& params) {
    write_container_file(path, checkpoint_entries(params));
}

RegressorParams load_checkpoint(const std::filesystem::path& path) {
    try {
        return params_from_entries(read_container_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

TrainingSequence make_sequence(const SalsaLiteFeature& features, const TrajectorySet& truth,
                               std::size_t frames_per_label, int gap_frames) {
    TrainingSequence seq;
    seq.inputs = pool_features(features, frames_per_label, truth.frame_count());
    seq.targets = select_targets(truth, derivative_ground_truth(truth, gap_frames));
    return seq;
}

}  // namespace salsaloc
