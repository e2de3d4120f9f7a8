#pragma once

// Random but structurally valid container streams for round-trip tests.

#include <vector>

#include "cmvc/bitstream.hpp"
#include "cmvc/hash.hpp"

namespace cmvc::testing_support {

inline std::vector<std::uint8_t> random_bytes(SplitMix64& rng, std::size_t max_len) {
  std::vector<std::uint8_t> out(rng.next() % (max_len + 1));
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.next());
  return out;
}

inline Stream random_stream(SplitMix64& rng) {
  Stream s;
  s.header.mode = rng.next() % 2 ? StreamMode::it2v : StreamMode::tt2v;
  s.header.width = static_cast<std::uint16_t>(1 + rng.next() % 640);
  s.header.height = static_cast<std::uint16_t>(1 + rng.next() % 480);
  s.header.planes = rng.next() % 2 ? 3 : 1;
  s.header.frame_count = static_cast<std::uint16_t>(2 + rng.next() % 60);
  s.header.frame_rate_num = static_cast<std::uint16_t>(1 + rng.next() % 60);
  s.header.frame_rate_den = static_cast<std::uint16_t>(1 + rng.next() % 2);

  const std::size_t frames = s.header.frame_count;
  const std::size_t n = 2 + rng.next() % std::min<std::size_t>(6, frames - 1);
  // Strictly increasing keyframes with both endpoints.
  std::vector<std::size_t> keys{0};
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const std::size_t lo = keys.back() + 1;
    const std::size_t hi = frames - 1 - (n - 1 - k);
    keys.push_back(lo + rng.next() % (hi - lo + 1));
  }
  keys.push_back(frames - 1);

  const bool it2v = s.header.mode == StreamMode::it2v;
  const bool with_weights = it2v && rng.next() % 2;
  for (std::size_t j = 0; j + 1 < keys.size(); ++j) {
    ClipRecord c;
    c.start_index = static_cast<std::uint16_t>(keys[j]);
    c.end_index = static_cast<std::uint16_t>(keys[j + 1]);
    const SectionTag key_tag = it2v ? SectionTag::kimg : SectionTag::ktxt;
    c.sections.push_back({key_tag, random_bytes(rng, 64)});
    if (j + 2 == keys.size()) c.sections.push_back({key_tag, random_bytes(rng, 64)});
    c.sections.push_back({SectionTag::mtxt, random_bytes(rng, 32)});
    if (with_weights) c.sections.push_back({SectionTag::wgts, random_bytes(rng, 16)});
    s.clips.push_back(std::move(c));
  }
  s.header.clip_count = static_cast<std::uint16_t>(s.clips.size());
  return s;
}

}  // namespace cmvc::testing_support
