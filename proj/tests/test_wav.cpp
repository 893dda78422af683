#include "support.hpp"

#include "salsaloc/audio.hpp"
#include "salsaloc/errors.hpp"
#include "salsaloc/tensor.hpp"

#include <doctest.h>

#include <cstring>

using namespace salsaloc;

namespace {

void put_u16(std::vector<char>& b, std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::vector<char>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

/// Minimal 16-bit PCM writer used as an independent reference.
std::vector<char> pcm16_file(const std::vector<std::int16_t>& interleaved, int channels, int rate) {
    std::vector<char> b;
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
    for (char c : std::string("RIFF")) b.push_back(c);
    put_u32(b, 36 + data_bytes);
    for (char c : std::string("WAVEfmt ")) b.push_back(c);
    put_u32(b, 16);
    put_u16(b, 1);
    put_u16(b, static_cast<std::uint16_t>(channels));
    put_u32(b, static_cast<std::uint32_t>(rate));
    put_u32(b, static_cast<std::uint32_t>(rate * channels * 2));
    put_u16(b, static_cast<std::uint16_t>(channels * 2));
    put_u16(b, 16);
    for (char c : std::string("data")) b.push_back(c);
    put_u32(b, data_bytes);
    for (auto s : interleaved) put_u16(b, static_cast<std::uint16_t>(s));
    return b;
}

}  // namespace

TEST_CASE("float wav round trip is exact at float precision") {
    testing::TempDir dir("wav");
    MultichannelAudio a;
    a.sample_rate = 24000;
    a.samples = SampleMatrix::Random(4, 1000) * 0.9;
    write_wav(dir / "a.wav", a);
    const auto b = read_wav(dir / "a.wav");
    REQUIRE(b.channels() == 4);
    REQUIRE(b.length() == 1000);
    CHECK(b.sample_rate == 24000);
    for (Eigen::Index m = 0; m < 4; ++m)
        for (Eigen::Index n = 0; n < 1000; ++n)
            CHECK(b.samples(m, n) == static_cast<double>(static_cast<float>(a.samples(m, n))));
}

TEST_CASE("pcm16 reads scaled by 1/32768") {
    testing::TempDir dir("wav16");
    write_file_bytes(dir / "p.wav", pcm16_file({16384, -32768, 0, 32767}, 2, 8000));
    const auto a = read_wav(dir / "p.wav");
    REQUIRE(a.channels() == 2);
    REQUIRE(a.length() == 2);
    CHECK(a.sample_rate == 8000);
    CHECK(a.samples(0, 0) == 0.5);
    CHECK(a.samples(1, 0) == -1.0);
    CHECK(a.samples(0, 1) == 0.0);
    CHECK(a.samples(1, 1) == doctest::Approx(32767.0 / 32768.0));
}

TEST_CASE("malformed wav files are data errors") {
    testing::TempDir dir("wavbad");
    write_file_bytes(dir / "short.wav", std::vector<char>{'R', 'I', 'F', 'F'});
    CHECK_THROWS_AS(read_wav(dir / "short.wav"), DataError);
    auto b = pcm16_file({1, 2, 3, 4}, 2, 8000);
    b.resize(b.size() - 3);
    write_file_bytes(dir / "trunc.wav", b);
    CHECK_THROWS_AS(read_wav(dir / "trunc.wav"), DataError);
    CHECK_THROWS_AS(read_wav(dir / "missing.wav"), DataError);
    MultichannelAudio nan;
    nan.samples = SampleMatrix::Constant(1, 4, std::nan(""));
    CHECK_THROWS_AS(write_wav(dir / "nan.wav", nan), DataError);
}
