#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cmvc/video.hpp"

namespace cmvc {

struct FeatureVector {
  std::vector<double> values;
};

enum class SelectionStrategy { cosine, mse, uniform, random };

std::string_view to_string(SelectionStrategy s) noexcept;
std::optional<SelectionStrategy> parse_strategy(std::string_view name) noexcept;

struct KeyframeSet {
  std::vector<std::size_t> indices;
  SelectionStrategy strategy = SelectionStrategy::uniform;

  std::size_t size() const noexcept { return indices.size(); }
};

/// Side length of the pooling grid used by the built-in embedding.
inline constexpr int kEmbedGrid = 16;

/// Built-in embedding: area-weighted 16x16 average pool of the first plane,
/// centered and L2-normalized. Constant frames map to (1, 0, ..., 0).
FeatureVector embed_frame(const Frame& frame);

/// Cosine similarity clamped to [-1, 1]. Throws on dimension mismatch or zero vectors.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

/// Reads one vector per line, whitespace-separated decimals. All lines must share a dimension.
std::vector<FeatureVector> load_feature_file(const std::filesystem::path& path);

/// Interior interval b (0-based) of the n-2 way partition of [1, N-2]; inclusive bounds.
std::pair<std::size_t, std::size_t> interior_interval(std::size_t frame_count, std::size_t n, std::size_t b);

/// Selects n keyframes. Frame 0 and N-1 are always kept; one keyframe is
/// picked inside each interior interval, left to right. `features` overrides
/// the built-in embedding for the cosine strategy (one vector per frame).
KeyframeSet select_keyframes(const RawVideo& video, std::size_t n, SelectionStrategy strategy, std::uint64_t seed,
                             std::span<const FeatureVector> features = {});

std::vector<ClipSpan> split_into_clips(const RawVideo& video, const KeyframeSet& keyframes);

}  // namespace cmvc
