#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "cmvc/error.hpp"
#include "cmvc/hash.hpp"
#include "cmvc/video.hpp"
#include "oracles.hpp"

namespace cmvc {
namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cmvc_test_video_" + name);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::contract;
}

TEST(RawVideo, LoadsFrameCountFromFileLength) {
  std::vector<std::uint8_t> bytes(20000, 7);
  const auto v = video_from_bytes(bytes, 100, 100, 1, {30, 1});
  EXPECT_EQ(v.frame_count(), 2u);

  std::vector<std::uint8_t> color(90000, 1);
  EXPECT_EQ(video_from_bytes(color, 100, 100, 3, {30, 1}).frame_count(), 3u);
}

TEST(RawVideo, RejectsPartialFrames) {
  std::vector<std::uint8_t> bytes(20001, 0);
  EXPECT_EQ(kind_of([&] { video_from_bytes(bytes, 100, 100, 1, {30, 1}); }), ErrorKind::malformed_input);
}

TEST(RawVideo, RejectsSingleFrame) {
  std::vector<std::uint8_t> bytes(10000, 0);
  EXPECT_EQ(kind_of([&] { video_from_bytes(bytes, 100, 100, 1, {30, 1}); }), ErrorKind::too_short);
}

TEST(RawVideo, SampleOrderIsFramePlaneRowMajor) {
  std::vector<std::uint8_t> bytes(2 * 2 * 3 * 2);
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(i);
  const auto v = video_from_bytes(bytes, 2, 2, 3, {25, 1});
  EXPECT_EQ(v.frame(0).at(0, 0, 0), 0);
  EXPECT_EQ(v.frame(0).at(0, 1, 0), 1);
  EXPECT_EQ(v.frame(0).at(0, 0, 1), 2);
  EXPECT_EQ(v.frame(0).at(1, 0, 0), 4);
  EXPECT_EQ(v.frame(1).at(2, 1, 1), 23);
}

TEST(RawVideo, FileRoundTripIsByteIdentical) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const int w = 1 + static_cast<int>(rng.next() % 40);
    const int h = 1 + static_cast<int>(rng.next() % 40);
    const int planes = rng.next() % 2 ? 3 : 1;
    const std::size_t frames = 2 + rng.next() % 4;
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * planes * frames);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next());
    const auto in = temp_path("in.yuv");
    const auto out = temp_path("out.yuv");
    write_file(in, bytes);
    write_raw_video(out, load_raw_video(in, w, h, planes, {30, 1}));
    EXPECT_EQ(read_file(out), bytes);
  }
}

TEST(Bpp, ExamplesAndLinearity) {
  const auto v10 = video_from_bytes(std::vector<std::uint8_t>(100 * 100 * 10), 100, 100, 1, {30, 1});
  // 8000 / (100 * 100 * 10) = 0.08.
  EXPECT_DOUBLE_EQ(compute_bpp(8000, v10), 0.08);
  EXPECT_DOUBLE_EQ(compute_bpp(0, v10), 0.0);
  const auto tiny = video_from_bytes(std::vector<std::uint8_t>(8 * 8 * 2), 8, 8, 1, {30, 1});
  EXPECT_DOUBLE_EQ(compute_bpp(1, tiny), 0.0078125);

  // Planes do not enter the denominator.
  const auto color = video_from_bytes(std::vector<std::uint8_t>(8 * 8 * 3 * 2), 8, 8, 3, {30, 1});
  EXPECT_DOUBLE_EQ(compute_bpp(1, color), 0.0078125);

  SplitMix64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t a = rng.next() % 1000000;
    const std::uint64_t b = rng.next() % 1000000;
    const double sum = compute_bpp(a, v10) + compute_bpp(b, v10);
    EXPECT_LE(std::abs(compute_bpp(a + b, v10) - sum), std::nextafter(sum, 1e300) - sum);
  }
}

}  // namespace
}  // namespace cmvc
