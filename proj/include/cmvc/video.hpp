#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cmvc {

struct FrameRate {
  std::uint32_t num = 30;
  std::uint32_t den = 1;

  friend bool operator==(const FrameRate&, const FrameRate&) = default;
};

/// Planar 8-bit picture. Planes are stored back to back, each row-major.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, int planes, std::uint8_t fill = 0);
  Frame(int width, int height, int planes, std::vector<std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int planes() const noexcept { return planes_; }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  std::size_t sample_count() const noexcept { return samples_.size(); }

  std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  std::span<std::uint8_t> samples() noexcept { return samples_; }
  std::span<const std::uint8_t> plane(int p) const;
  std::span<std::uint8_t> plane(int p);

  std::uint8_t at(int p, int x, int y) const { return plane(p)[static_cast<std::size_t>(y) * width_ + x]; }

  bool same_geometry(const Frame& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && planes_ == other.planes_;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int planes_ = 0;
  std::vector<std::uint8_t> samples_;
};

class RawVideo {
 public:
  RawVideo(int width, int height, int planes, FrameRate rate, std::vector<Frame> frames);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int planes() const noexcept { return planes_; }
  FrameRate frame_rate() const noexcept { return rate_; }
  std::size_t frame_count() const noexcept { return frames_.size(); }
  const std::vector<Frame>& frames() const noexcept { return frames_; }
  const Frame& frame(std::size_t i) const { return frames_.at(i); }

  std::size_t frame_bytes() const noexcept { return static_cast<std::size_t>(width_) * height_ * planes_; }

  friend bool operator==(const RawVideo&, const RawVideo&) = default;

 private:
  int width_;
  int height_;
  int planes_;
  FrameRate rate_;
  std::vector<Frame> frames_;
};

/// Inclusive frame span delimited by two consecutive keyframes.
struct ClipSpan {
  std::size_t start_index = 0;
  std::size_t end_index = 0;

  std::size_t intermediate_count() const noexcept { return end_index - start_index - 1; }
  friend bool operator==(const ClipSpan&, const ClipSpan&) = default;
};

RawVideo video_from_bytes(std::span<const std::uint8_t> bytes, int width, int height, int planes, FrameRate rate);
std::vector<std::uint8_t> video_to_bytes(const RawVideo& video);

RawVideo load_raw_video(const std::filesystem::path& path, int width, int height, int planes, FrameRate rate);
void write_raw_video(const std::filesystem::path& path, const RawVideo& video);

/// Bits per pixel; planes do not enter the denominator.
double compute_bpp(std::uint64_t total_bits, const RawVideo& video);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace cmvc
