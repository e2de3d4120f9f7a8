#include "cmvc/video.hpp"

#include <fstream>
#include <iterator>
#include <string>

#include "cmvc/error.hpp"

namespace cmvc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::contract: return "contract error";
    case ErrorKind::malformed_input: return "malformed input";
    case ErrorKind::too_short: return "too short";
    case ErrorKind::malformed_payload: return "malformed payload";
    case ErrorKind::unsupported_stream: return "unsupported stream";
    case ErrorKind::corrupt_stream: return "corrupt stream";
    case ErrorKind::malformed_stream: return "malformed stream";
    case ErrorKind::no_overlap: return "no overlap";
    case ErrorKind::backend_unavailable: return "backend unavailable";
    case ErrorKind::protocol_violation: return "protocol violation";
    case ErrorKind::numerical_failure: return "numerical failure";
    case ErrorKind::config: return "config error";
  }
  return "error";
}

namespace {

void check_geometry(int width, int height, int planes) {
  require(width > 0 && height > 0, "frame dimensions must be positive");
  require(planes == 1 || planes == 3, "planes must be 1 or 3");
}

}  // namespace

Frame::Frame(int width, int height, int planes, std::uint8_t fill)
    : width_(width), height_(height), planes_(planes) {
  check_geometry(width, height, planes);
  samples_.assign(static_cast<std::size_t>(width) * height * planes, fill);
}

Frame::Frame(int width, int height, int planes, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), planes_(planes), samples_(std::move(samples)) {
  check_geometry(width, height, planes);
  require(samples_.size() == static_cast<std::size_t>(width) * height * planes,
          "sample count does not match frame geometry");
}

std::span<const std::uint8_t> Frame::plane(int p) const {
  require(p >= 0 && p < planes_, "plane index out of range");
  return std::span<const std::uint8_t>(samples_).subspan(p * plane_size(), plane_size());
}

std::span<std::uint8_t> Frame::plane(int p) {
  require(p >= 0 && p < planes_, "plane index out of range");
  return std::span<std::uint8_t>(samples_).subspan(p * plane_size(), plane_size());
}

RawVideo::RawVideo(int width, int height, int planes, FrameRate rate, std::vector<Frame> frames)
    : width_(width), height_(height), planes_(planes), rate_(rate), frames_(std::move(frames)) {
  check_geometry(width, height, planes);
  require(rate.num > 0 && rate.den > 0, "frame rate must be positive");
  if (frames_.size() < 2) fail(ErrorKind::too_short, "a video needs at least 2 frames");
  for (const auto& f : frames_) {
    require(f.width() == width && f.height() == height && f.planes() == planes,
            "frame geometry differs from video geometry");
  }
}

RawVideo video_from_bytes(std::span<const std::uint8_t> bytes, int width, int height, int planes, FrameRate rate) {
  check_geometry(width, height, planes);
  const std::size_t frame_size = static_cast<std::size_t>(width) * height * planes;
  if (bytes.size() % frame_size != 0) {
    fail(ErrorKind::malformed_input, "byte length " + std::to_string(bytes.size()) +
                                         " is not a multiple of the frame size " + std::to_string(frame_size));
  }
  const std::size_t count = bytes.size() / frame_size;
  if (count < 2) fail(ErrorKind::too_short, "input holds " + std::to_string(count) + " frame(s), need at least 2");
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto chunk = bytes.subspan(i * frame_size, frame_size);
    frames.emplace_back(width, height, planes, std::vector<std::uint8_t>(chunk.begin(), chunk.end()));
  }
  return RawVideo(width, height, planes, rate, std::move(frames));
}

std::vector<std::uint8_t> video_to_bytes(const RawVideo& video) {
  std::vector<std::uint8_t> out;
  out.reserve(video.frame_bytes() * video.frame_count());
  for (const auto& f : video.frames()) out.insert(out.end(), f.samples().begin(), f.samples().end());
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::malformed_input, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::malformed_input, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::malformed_input, "write failed for " + path.string());
}

RawVideo load_raw_video(const std::filesystem::path& path, int width, int height, int planes, FrameRate rate) {
  return video_from_bytes(read_file(path), width, height, planes, rate);
}

void write_raw_video(const std::filesystem::path& path, const RawVideo& video) {
  write_file(path, video_to_bytes(video));
}

double compute_bpp(std::uint64_t total_bits, const RawVideo& video) {
  const double pixels = static_cast<double>(video.width()) * video.height() * static_cast<double>(video.frame_count());
  return static_cast<double>(total_bits) / pixels;
}

}  // namespace cmvc
