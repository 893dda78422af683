#include "salsaloc/tensor.hpp"
#include "salsaloc/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>

static_assert(std::endian::native == std::endian::little, "TensorFile I/O assumes a little-endian host");

namespace salsaloc {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'T', '1'};
constexpr std::uint32_t kContainerMarker = 0xFFFFFFFFu;

std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

template <typename T>
void put(std::vector<char>& out, T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
public:
    explicit Reader(std::span<const char> b) : bytes_(b) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string get_string(std::size_t n) {
        need(n);
        std::string s(bytes_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw DataError("tensor file: truncated");
    }
    std::span<const char> bytes_;
    std::size_t pos_ = 0;
};

void put_record(std::vector<char>& out, const Tensor& t, DType dtype) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.dims()) put<std::uint64_t>(out, d);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
    for (double v : t.data()) {
        if (dtype == DType::F32)
            put<float>(out, static_cast<float>(v));
        else
            put<double>(out, v);
    }
}

Tensor get_record(Reader& r, DType* dtype = nullptr) {
    const auto rank = r.get<std::uint32_t>();
    if (rank > 16) throw DataError("tensor file: implausible rank " + std::to_string(rank));
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = r.get<std::uint64_t>();
    const auto tag = r.get<std::uint8_t>();
    if (tag > 1) throw DataError("tensor file: unknown dtype tag " + std::to_string(tag));
    if (dtype) *dtype = static_cast<DType>(tag);
    const std::size_t n = product(dims);
    if (n > r.remaining() / (tag == 0 ? 4 : 8))
        throw DataError("tensor file: payload shorter than header dims");
    std::vector<double> data(n);
    for (auto& v : data) v = tag == 0 ? static_cast<double>(r.get<float>()) : r.get<double>();
    return Tensor(std::move(dims), std::move(data));
}

void check_magic(Reader& r) {
    if (r.get_string(4) != std::string(kMagic, 4)) throw DataError("tensor file: bad magic");
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : dims_(std::move(dims)), data_(product(dims_), fill) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    if (data_.size() != product(dims_)) throw DataError("Tensor: data size does not match dims");
}

std::vector<char> encode_tensor(const Tensor& t, DType dtype) {
    std::vector<char> out(kMagic, kMagic + 4);
    put_record(out, t, dtype);
    return out;
}

Tensor decode_tensor(std::span<const char> bytes) {
    Reader r(bytes);
    check_magic(r);
    Tensor t = get_record(r);
    if (!r.done()) throw DataError("tensor file: trailing bytes after payload");
    return t;
}

std::vector<char> encode_container(const std::vector<NamedTensor>& entries) {
    std::vector<char> out(kMagic, kMagic + 4);
    put<std::uint32_t>(out, kContainerMarker);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
        out.insert(out.end(), e.name.begin(), e.name.end());
        put_record(out, e.tensor, e.dtype);
    }
    return out;
}

std::vector<NamedTensor> decode_container(std::span<const char> bytes) {
    Reader r(bytes);
    check_magic(r);
    if (r.get<std::uint32_t>() != kContainerMarker)
        throw DataError("tensor file: not a named container");
    const auto count = r.get<std::uint32_t>();
    std::vector<NamedTensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor e;
        e.name = r.get_string(r.get<std::uint32_t>());
        e.tensor = get_record(r, &e.dtype);
        out.push_back(std::move(e));
    }
    if (!r.done()) throw DataError("tensor file: trailing bytes after container");
    return out;
}

std::vector<char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const char> bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("write failed for " + path.string());
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& t, DType dtype) {
    write_file_bytes(path, encode_tensor(t, dtype));
}

Tensor read_tensor_file(const std::filesystem::path& path) {
    return decode_tensor(read_file_bytes(path));
}

void write_container_file(const std::filesystem::path& path, const std::vector<NamedTensor>& entries) {
    write_file_bytes(path, encode_container(entries));
}

std::vector<NamedTensor> read_container_file(const std::filesystem::path& path) {
    return decode_container(read_file_bytes(path));
}

const NamedTensor& find_entry(const std::vector<NamedTensor>& entries, const std::string& name) {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw DataError("tensor file: missing entry '" + name + "'");
}

}  // namespace salsaloc
