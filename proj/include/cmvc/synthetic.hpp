#pragma once

#include <cstdint>

#include "cmvc/video.hpp"

namespace cmvc {

struct SyntheticSpec {
  int width = 64;
  int height = 64;
  int planes = 1;
  std::size_t frames = 16;
  /// Distance between scene anchors; intermediate frames blend adjacent anchors.
  std::size_t segment = 5;
  /// Blend weight of frame t in a segment is (1 - t/segment)^gamma; gamma != 1 makes the schedule non-linear.
  double gamma = 1.6;
  std::uint64_t seed = 0;
};

/// Smooth random picture (a few sinusoids plus a gradient), deterministic in the seed.
Frame smooth_pattern(int width, int height, int planes, std::uint64_t seed);

/// Video whose frames between anchors are exact (rounded) blends of the anchors.
RawVideo make_synthetic_video(const SyntheticSpec& spec);

}  // namespace cmvc
