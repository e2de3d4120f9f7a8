#include "cmvc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmvc/backends.hpp"
#include "cmvc/error.hpp"
#include "cmvc/hash.hpp"

namespace cmvc {

Frame smooth_pattern(int width, int height, int planes, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Frame f(width, height, planes);
  for (int p = 0; p < planes; ++p) {
    struct Wave {
      double fx, fy, phase, amp;
    };
    Wave waves[3];
    for (auto& w : waves) {
      w.fx = (rng.next_unit() * 4.0 - 2.0) * 2.0 * std::numbers::pi / width;
      w.fy = (rng.next_unit() * 4.0 - 2.0) * 2.0 * std::numbers::pi / height;
      w.phase = rng.next_unit() * 2.0 * std::numbers::pi;
      w.amp = 15.0 + rng.next_unit() * 30.0;
    }
    const double gx = (rng.next_unit() - 0.5) * 60.0 / width;
    const double gy = (rng.next_unit() - 0.5) * 60.0 / height;
    const double base = 70.0 + rng.next_unit() * 110.0;
    auto plane = f.plane(p);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = base + gx * (x - width / 2.0) + gy * (y - height / 2.0);
        for (const auto& w : waves) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
        plane[static_cast<std::size_t>(y) * width + x] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return f;
}

RawVideo make_synthetic_video(const SyntheticSpec& spec) {
  require(spec.frames >= 2, "synthetic video needs at least 2 frames");
  require(spec.segment >= 1, "segment length must be positive");
  SplitMix64 seeds(spec.seed);
  std::vector<Frame> anchors;
  for (std::size_t a = 0; a * spec.segment < spec.frames + spec.segment; ++a) {
    anchors.push_back(smooth_pattern(spec.width, spec.height, spec.planes, seeds.next()));
  }
  std::vector<Frame> frames;
  frames.reserve(spec.frames);
  for (std::size_t i = 0; i < spec.frames; ++i) {
    const std::size_t a = i / spec.segment;
    const std::size_t t = i % spec.segment;
    if (t == 0) {
      frames.push_back(anchors[a]);
      continue;
    }
    const double w = std::pow(1.0 - double(t) / double(spec.segment), spec.gamma);
    frames.push_back(interpolate_frames(anchors[a], anchors[a + 1], w));
  }
  return RawVideo(spec.width, spec.height, spec.planes, FrameRate{30, 1}, std::move(frames));
}

}  // namespace cmvc
