#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace salsaloc {

/// Dense row-major tensor of doubles.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);
    Tensor(std::vector<std::size_t> dims, std::vector<double> data);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t rank() const { return dims_.size(); }
    std::size_t dim(std::size_t i) const { return dims_.at(i); }
    std::size_t size() const { return data_.size(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * dims_[1] + j) * dims_[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * dims_[1] + j) * dims_[2] + k];
    }

    bool operator==(const Tensor&) const = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

// TensorFile layout (all integers little-endian):
//   "SLT1" | u32 rank | u64 dims[rank] | u8 dtype | payload (row-major)
// Named container:
//   "SLT1" | u32 0xFFFFFFFF | u32 count |
//   count x ( u32 name_len | name bytes | u32 rank | u64 dims[rank] | u8 dtype | payload )
enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

struct NamedTensor {
    std::string name;
    Tensor tensor;
    DType dtype = DType::F64;
};

std::vector<char> encode_tensor(const Tensor& t, DType dtype);
Tensor decode_tensor(std::span<const char> bytes);

std::vector<char> encode_container(const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> decode_container(std::span<const char> bytes);

void write_tensor_file(const std::filesystem::path& path, const Tensor& t, DType dtype);
Tensor read_tensor_file(const std::filesystem::path& path);
void write_container_file(const std::filesystem::path& path, const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> read_container_file(const std::filesystem::path& path);

/// Entry lookup by name; throws DataError when absent.
const NamedTensor& find_entry(const std::vector<NamedTensor>& entries, const std::string& name);

std::vector<char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const char> bytes);

}  // namespace salsaloc
