#include "salsaloc/audio.hpp"
#include "salsaloc/errors.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace salsaloc {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
void put(std::vector<char>& out, T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<char>& buf, std::size_t offset) {
    if (offset + sizeof(T) > buf.size()) throw DataError("wav: truncated header");
    T value;
    std::memcpy(&value, buf.data() + offset, sizeof(T));
    return value;
}

}  // namespace

double MultichannelAudio::mean_power() const {
    if (samples.size() == 0) return 0.0;
    return samples.squaredNorm() / static_cast<double>(samples.size());
}

void write_wav(const std::filesystem::path& path, const MultichannelAudio& audio) {
    if (!audio.samples.allFinite()) throw DataError("wav: refusing to write non-finite samples");
    const auto channels = static_cast<std::uint16_t>(audio.channels());
    const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
    const std::uint32_t data_bytes =
        static_cast<std::uint32_t>(audio.length() * audio.channels() * sizeof(float));

    std::vector<char> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put<std::uint32_t>(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put<std::uint32_t>(out, 16);
    put<std::uint16_t>(out, kFormatFloat);
    put<std::uint16_t>(out, channels);
    put<std::uint32_t>(out, rate);
    put<std::uint32_t>(out, rate * channels * 4);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(channels * 4));
    put<std::uint16_t>(out, 32);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put<std::uint32_t>(out, data_bytes);
    for (std::size_t n = 0; n < audio.length(); ++n)
        for (std::size_t m = 0; m < audio.channels(); ++m)
            put<float>(out, static_cast<float>(audio.samples(m, n)));

    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("wav: cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("wav: write failed for " + path.string());
}

MultichannelAudio read_wav(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("wav: cannot open " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
        std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw DataError("wav: " + path.string() + " is not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t data_offset = 0, data_size = 0;
    bool have_fmt = false;

    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::string id(buf.data() + pos, 4);
        const auto size = get<std::uint32_t>(buf, pos + 4);
        const std::size_t body = pos + 8;
        if (id == "fmt ") {
            format = get<std::uint16_t>(buf, body);
            channels = get<std::uint16_t>(buf, body + 2);
            rate = get<std::uint32_t>(buf, body + 4);
            bits = get<std::uint16_t>(buf, body + 14);
            if (format == kFormatExtensible) {
                if (size < 40) throw DataError("wav: short extensible fmt chunk");
                format = get<std::uint16_t>(buf, body + 24);
            }
            have_fmt = true;
        } else if (id == "data") {
            data_offset = body;
            data_size = size;
            // Streaming writers leave the size at its maximum; anything else must fit.
            if (size == 0xFFFFFFFFu)
                data_size = buf.size() - body;
            else if (size > buf.size() - body)
                throw DataError("wav: truncated data chunk in " + path.string());
            break;
        }
        pos = body + size + (size & 1u);
    }
    if (!have_fmt) throw DataError("wav: missing fmt chunk in " + path.string());
    if (data_offset == 0) throw DataError("wav: missing data chunk in " + path.string());
    if (channels == 0 || rate == 0) throw DataError("wav: invalid channel count or rate");

    const bool is_float = format == kFormatFloat && bits == 32;
    const bool is_pcm = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
    if (!is_float && !is_pcm)
        throw DataError("wav: unsupported format " + std::to_string(format) + " with " +
                        std::to_string(bits) + " bits");

    const std::size_t width = bits / 8;
    if (data_size % (width * channels) != 0) throw DataError("wav: partial sample frame in " + path.string());
    const std::size_t frames = data_size / (width * channels);
    MultichannelAudio audio;
    audio.sample_rate = rate;
    audio.samples.resize(channels, static_cast<Eigen::Index>(frames));
    const char* p = buf.data() + data_offset;
    for (std::size_t n = 0; n < frames; ++n) {
        for (std::size_t m = 0; m < channels; ++m, p += width) {
            double v = 0.0;
            if (is_float) {
                float x;
                std::memcpy(&x, p, 4);
                v = x;
            } else if (bits == 16) {
                std::int16_t x;
                std::memcpy(&x, p, 2);
                v = x / 32768.0;
            } else if (bits == 24) {
                const auto* u = reinterpret_cast<const unsigned char*>(p);
                std::int32_t x = (u[0] << 8) | (u[1] << 16) | (u[2] << 24);
                v = (x >> 8) / 8388608.0;
            } else {
                std::int32_t x;
                std::memcpy(&x, p, 4);
                v = x / 2147483648.0;
            }
            audio.samples(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = v;
        }
    }
    if (!audio.samples.allFinite()) throw DataError("wav: non-finite samples in " + path.string());
    return audio;
}

}  // namespace salsaloc
