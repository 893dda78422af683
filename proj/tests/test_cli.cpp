#include "support.hpp"

#include "cli.hpp"

#include "salsaloc/io.hpp"
#include "salsaloc/tensor.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace salsaloc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "salsaloc");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string small_config(const testing::TempDir& dir) {
    const auto path = dir / "cfg.json";
    write_text_file(path, R"({"scene": {"count": 2, "generator": {"duration_frames": 60, "min_event_frames": 20,
                                 "max_event_frames": 50, "min_sources": 2, "max_sources": 3}}})");
    return path.string();
}

}  // namespace

TEST_CASE("self-evaluation of simulated truth is perfect") {
    testing::TempDir dir("cli_self");
    const auto cfg = small_config(dir);
    const auto sim = (dir / "sim").string();
    REQUIRE(run({"-c", cfg, "simulate", "-o", sim}).code == 0);
    CHECK(fs::exists(dir / "sim" / "scene_000.wav"));
    CHECK(fs::exists(dir / "sim" / "scene_001_deriv.csv"));
    const auto r = run({"-c", cfg, "eval", (dir / "sim" / "scene_000_truth.csv").string(),
                        (dir / "sim" / "scene_001_truth.csv").string(), "--truth-dir", sim, "-o",
                        (dir / "rep.csv").string()});
    REQUIRE(r.code == 0);
    const auto report = read_text_file(dir / "rep.csv");
    CHECK(report.rfind("# manifest config=", 0) == 0);
    CHECK(report.find("summary,FNs,0") != std::string::npos);
    CHECK(report.find("summary,FNm,0") != std::string::npos);
    for (const char* split : {"summary,Pds,", "summary,Pdm,"}) {
        const auto pos = report.find(split);
        if (pos == std::string::npos) continue;  // split absent from these scenes
        const auto value = report.substr(pos + std::strlen(split), report.find('\n', pos) - pos - std::strlen(split));
        CHECK((value == "100.0" || value == "NA"));
    }
}

TEST_CASE("identity fusion scores like the raw predictions") {
    testing::TempDir dir("cli_alpha");
    const auto cfg = small_config(dir);
    const auto sim = (dir / "sim").string(), pred = (dir / "pred").string(), fused = (dir / "fused").string();
    REQUIRE(run({"-c", cfg, "simulate", "-o", sim}).code == 0);
    REQUIRE(run({"-c", cfg, "predict", (dir / "sim" / "scene_000_truth.csv").string(), "-o", pred, "--snr", "-5"})
                .code == 0);
    REQUIRE(run({"-c", cfg, "fuse", (dir / "pred" / "scene_000_pred.csv").string(), "-o", fused, "--alpha", "1"})
                .code == 0);
    const auto raw = run({"-c", cfg, "eval", (dir / "pred" / "scene_000_pred.csv").string(), "--truth-dir", sim});
    const auto id = run({"-c", cfg, "eval", (dir / "fused" / "scene_000_fused.csv").string(), "--truth-dir", sim});
    REQUIRE(raw.code == 0);
    REQUIRE(id.code == 0);
    CHECK(raw.out == id.out);
}

TEST_CASE("plot writes one SVG per class plus the MAE chart") {
    testing::TempDir dir("cli_plot");
    const auto cfg = small_config(dir);
    const auto sim = (dir / "sim").string(), pred = (dir / "pred").string();
    REQUIRE(run({"-c", cfg, "simulate", "-o", sim}).code == 0);
    REQUIRE(run({"-c", cfg, "predict", (dir / "sim" / "scene_000_truth.csv").string(), "-o", pred}).code == 0);
    REQUIRE(run({"-c", cfg, "plot", "--truth", (dir / "sim" / "scene_000_truth.csv").string(), "--raw",
                 (dir / "pred" / "scene_000_pred.csv").string(), "-o", (dir / "plots").string()})
                .code == 0);
    const auto mae = read_text_file(dir / "plots" / "classwise_mae.svg");
    CHECK(mae.rfind("<svg", 0) == 0);
    int svgs = 0;
    for (const auto& e : fs::directory_iterator(dir / "plots")) svgs += e.path().extension() == ".svg";
    CHECK(svgs >= 2);
}

TEST_CASE("exit codes and machine-readable errors") {
    testing::TempDir dir("cli_err");
    const auto bad = dir / "bad.json";
    write_text_file(bad, R"({"fusion": {"alpha": 2}})");
    auto r = run({"-c", bad.string(), "simulate", "-o", (dir / "x").string()});
    CHECK(r.code == 2);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["exit_code"] == 2);
    CHECK(j["key"] == "fusion.alpha");

    CHECK(run({"simulate"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"--help"}).code == 0);

    r = run({"eval", (dir / "nope_pred.csv").string(), "--truth-dir", dir.path().string()});
    CHECK(r.code == 3);
    CHECK(nlohmann::json::parse(r.err)["error"] == "data");

    write_text_file(dir / "m_pred.csv", "frame,class,x,y,z,dx,dy,dz\n0,0,abc,0,0,0,0,0\n");
    r = run({"fuse", (dir / "m_pred.csv").string(), "-o", dir.path().string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("m_pred.csv:2") != std::string::npos);

    // (-1 + 1 + 0) / 2 = 0 cannot be normalized
    write_text_file(dir / "z_pred.csv", "frame,class,x,y,z,dx,dy,dz\n0,0,1,0,0,0,0,0\n1,0,-1,0,0,0,0,0\n");
    r = run({"fuse", (dir / "z_pred.csv").string(), "-o", dir.path().string()});
    CHECK(r.code == 4);
    CHECK(nlohmann::json::parse(r.err)["error"] == "numeric");
}

TEST_CASE("manifest hashes") {
    const std::string s = "a";
    CHECK(cli::hex64(cli::fnv1a(std::span<const char>(s.data(), 0))) == "cbf29ce484222325");
    CHECK(cli::hex64(cli::fnv1a(std::span<const char>(s.data(), 1))) == "af63dc4c8601ec8c");
}
