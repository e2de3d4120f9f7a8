#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cmvc/video.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kCli = CMVC_CLI_PATH;
const fs::path kData = CMVC_DATA_DIR;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  FILE* p = ::popen((kCli + " " + args + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path temp(const std::string& name) { return fs::temp_directory_path() / ("cmvc_cli_" + name); }

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

TEST(Cli, BdrateOfIdenticalCurvesIsZero) {
  const auto c = temp("curve.csv");
  write_text(c, "rate_bpp,distortion\n0.01,30\n0.02,33\n0.04,36\n0.08,39\n");
  const auto r = run("bdrate --anchor " + c.string() + " --test " + c.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.0000\n");
}

TEST(Cli, BdrateReportMatrix) {
  const auto a = temp("a.csv");
  const auto t = temp("t.csv");
  write_text(a, "0.01,30\n0.02,33\n0.04,36\n0.08,39\n");
  write_text(t, "0.005,30\n0.01,33\n0.02,36\n0.04,39\n");
  const auto out = temp("bd.json");
  const auto r = run("bdrate --anchor " + a.string() + " --test " + t.string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "-50.0000\n");
  const auto j = nlohmann::json::parse(std::ifstream(out));
  EXPECT_NEAR(j["matrix"]["test"]["anchor"].get<double>(), 100.0, 1e-9);
  EXPECT_TRUE(fs::exists(out.string() + ".manifest.json"));
}

TEST(Cli, KeyframesTwoAreEndpoints) {
  const auto r = run("keyframes --input " + (kData / "synthetic16.yuv").string() + " --keyframes 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0,15\n");
}

TEST(Cli, RoundtripWritesStreamReportAndManifest) {
  const auto out = temp("rt.json");
  const auto r = run("roundtrip --input " + (kData / "synthetic16.yuv").string() + " --keyframes 3 --optimize --steps 20 --out " +
                     out.string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(std::ifstream(out));
  const auto stream = cmvc::read_file(out.string() + ".cmvc");
  EXPECT_DOUBLE_EQ(j["bpp"].get<double>(), 8.0 * stream.size() / (64 * 64 * 16));
  EXPECT_GT(j["psnr"].get<double>(), 15.0);
  EXPECT_EQ(j["keyframes"].size(), 3u);
  const auto m = nlohmann::json::parse(std::ifstream(out.string() + ".manifest.json"));
  EXPECT_EQ(m["command"], "roundtrip");
  EXPECT_TRUE(m.contains("timings_ms"));
}

TEST(Cli, EncodeDecodeEvaluate) {
  const auto s = temp("e.cmvc");
  const auto d = temp("e.yuv");
  const auto input = (kData / "synthetic16.yuv").string();
  ASSERT_EQ(run("encode --input " + input + " --keyframes 4 --out " + s.string()).code, 0);
  ASSERT_EQ(run("decode --input " + s.string() + " --out " + d.string()).code, 0);
  EXPECT_EQ(fs::file_size(d), 64u * 64 * 16);
  const auto r = run("evaluate --input " + d.string() + " --reference " + input + " --stream " + s.string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["psnr"].get<double>(), 15.0);
  EXPECT_EQ(j["bits"].get<std::size_t>(), 8 * fs::file_size(s));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("encode --bogus").code, 2);
  EXPECT_EQ(run("keyframes --input /nonexistent.yuv").code, 3);
  const auto c = temp("short.csv");
  write_text(c, "0.1,30\n0.2,31\n");
  EXPECT_EQ(run("bdrate --anchor " + c.string() + " --test " + c.string()).code, 3);
  const auto s = temp("x.cmvc");
  ASSERT_EQ(run("encode --input " + (kData / "synthetic16.yuv").string() + " --out " + s.string()).code, 0);
  EXPECT_EQ(run("decode --input " + s.string() + " --out " + temp("x.yuv").string() + " --backend 'external:/nonexistent/b'").code, 4);
}

}  // namespace
