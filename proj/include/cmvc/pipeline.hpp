#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmvc/backends.hpp"
#include "cmvc/bitstream.hpp"
#include "cmvc/codecs.hpp"
#include "cmvc/keyframes.hpp"
#include "cmvc/optimizer.hpp"
#include "cmvc/video.hpp"

namespace cmvc {

/// Per-keyframe content text and per-clip motion text. File format: UTF-8,
/// `[keyframe i]` / `[clip j]` headers (0-based ordinals) followed by free
/// text lines; trailing blank lines of a section are dropped.
struct TextSidecar {
  std::map<std::size_t, std::string> keyframe_text;
  std::map<std::size_t, std::string> clip_text;

  static TextSidecar parse(std::string_view text);
  static TextSidecar load(const std::filesystem::path& path);
};

struct EncodeConfig {
  StreamMode mode = StreamMode::it2v;
  std::size_t n_keyframes = 2;
  SelectionStrategy strategy = SelectionStrategy::cosine;
  QualityFactor quality = QualityFactor::medium;
  std::optional<OptimizerConfig> optimizer;
  BackendSpec backend;
  TextSidecar text;
  std::uint64_t seed = 0;
  /// Optional externally computed embeddings, one per frame.
  std::vector<FeatureVector> features;
  unsigned jobs = 1;
};

struct EncodeOutcome {
  std::vector<std::uint8_t> stream;
  KeyframeSet keyframes;
  std::vector<ClipSpan> clips;
  /// One entry per clip when the optimizer ran.
  std::vector<OptimizationResult> optimization;
  RateBreakdown rate;
};

EncodeOutcome encode_detailed(const RawVideo& video, const EncodeConfig& cfg);
std::vector<std::uint8_t> encode(const RawVideo& video, const EncodeConfig& cfg);

RawVideo decode(std::span<const std::uint8_t> stream, const BackendSpec& backend, unsigned jobs = 1);

}  // namespace cmvc
