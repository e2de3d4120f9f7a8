#include "cmvc/keyframes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "cmvc/error.hpp"
#include "cmvc/hash.hpp"

namespace cmvc {

std::string_view to_string(SelectionStrategy s) noexcept {
  switch (s) {
    case SelectionStrategy::cosine: return "cosine";
    case SelectionStrategy::mse: return "mse";
    case SelectionStrategy::uniform: return "uniform";
    case SelectionStrategy::random: return "random";
  }
  return "?";
}

std::optional<SelectionStrategy> parse_strategy(std::string_view name) noexcept {
  for (auto s : {SelectionStrategy::cosine, SelectionStrategy::mse, SelectionStrategy::uniform,
                 SelectionStrategy::random}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

namespace {

// Overlap of pixel i with grid cell g, both scaled by (grid * length) so
// every overlap is an integer. Cell g spans [g*len, (g+1)*len), pixel i spans
// [i*grid, (i+1)*grid).
std::int64_t overlap(int i, int g, int len) {
  const std::int64_t lo = std::max<std::int64_t>(static_cast<std::int64_t>(i) * kEmbedGrid,
                                                 static_cast<std::int64_t>(g) * len);
  const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(i + 1) * kEmbedGrid,
                                                 static_cast<std::int64_t>(g + 1) * len);
  return std::max<std::int64_t>(0, hi - lo);
}

std::vector<double> pool_first_plane(const Frame& frame) {
  const int w = frame.width();
  const int h = frame.height();
  const auto plane = frame.plane(0);
  std::vector<double> grid(kEmbedGrid * kEmbedGrid, 0.0);
  for (int gy = 0; gy < kEmbedGrid; ++gy) {
    const int y0 = static_cast<int>(static_cast<std::int64_t>(gy) * h / kEmbedGrid);
    const int y1 = std::min(h - 1, static_cast<int>((static_cast<std::int64_t>(gy + 1) * h) / kEmbedGrid));
    for (int gx = 0; gx < kEmbedGrid; ++gx) {
      const int x0 = static_cast<int>(static_cast<std::int64_t>(gx) * w / kEmbedGrid);
      const int x1 = std::min(w - 1, static_cast<int>((static_cast<std::int64_t>(gx + 1) * w) / kEmbedGrid));
      std::int64_t acc = 0;
      for (int y = y0; y <= y1; ++y) {
        const std::int64_t wy = overlap(y, gy, h);
        if (wy == 0) continue;
        for (int x = x0; x <= x1; ++x) {
          const std::int64_t wx = overlap(x, gx, w);
          acc += wx * wy * plane[static_cast<std::size_t>(y) * w + x];
        }
      }
      // Cell area in scaled units is w * h.
      grid[gy * kEmbedGrid + gx] = static_cast<double>(acc) / (static_cast<double>(w) * h);
    }
  }
  return grid;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double frame_mse(const Frame& a, const Frame& b) {
  const auto sa = a.samples();
  const auto sb = b.samples();
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const int d = int(sa[i]) - int(sb[i]);
    acc += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(acc) / static_cast<double>(sa.size());
}

}  // namespace

FeatureVector embed_frame(const Frame& frame) {
  auto grid = pool_first_plane(frame);
  double mean = 0.0;
  for (double v : grid) mean += v;
  mean /= static_cast<double>(grid.size());
  for (double& v : grid) v -= mean;
  const double norm = std::sqrt(dot(grid, grid));
  if (norm <= 1e-9) {
    std::fill(grid.begin(), grid.end(), 0.0);
    grid[0] = 1.0;
    return {std::move(grid)};
  }
  for (double& v : grid) v /= norm;
  return {std::move(grid)};
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  require(!a.values.empty() && a.values.size() == b.values.size(), "feature dimensions differ");
  const double na = std::sqrt(dot(a.values, a.values));
  const double nb = std::sqrt(dot(b.values, b.values));
  require(na > 0.0 && nb > 0.0, "cosine similarity of a zero vector");
  return std::clamp(dot(a.values, b.values) / (na * nb), -1.0, 1.0);
}

std::vector<FeatureVector> load_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::malformed_input, "cannot open feature file " + path.string());
  std::vector<FeatureVector> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    FeatureVector v;
    double x = 0.0;
    while (ls >> x) {
      if (!std::isfinite(x)) fail(ErrorKind::malformed_input, "non-finite feature value");
      v.values.push_back(x);
    }
    if (!ls.eof()) fail(ErrorKind::malformed_input, "unparsable feature line " + std::to_string(out.size() + 1));
    if (v.values.empty()) continue;
    if (!out.empty() && out.front().values.size() != v.values.size()) {
      fail(ErrorKind::malformed_input, "feature dimensions differ between lines");
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::pair<std::size_t, std::size_t> interior_interval(std::size_t frame_count, std::size_t n, std::size_t b) {
  const std::size_t interior = frame_count - 2;
  const std::size_t parts = n - 2;
  return {1 + b * interior / parts, (b + 1) * interior / parts};
}

KeyframeSet select_keyframes(const RawVideo& video, std::size_t n, SelectionStrategy strategy, std::uint64_t seed,
                             std::span<const FeatureVector> features) {
  const std::size_t count = video.frame_count();
  require(n >= 2 && n <= count, "keyframe count must lie in [2, N]");

  KeyframeSet out;
  out.strategy = strategy;
  out.indices.push_back(0);

  std::vector<FeatureVector> embedded;
  std::span<const FeatureVector> feats = features;
  if (strategy == SelectionStrategy::cosine && n > 2) {
    if (feats.empty()) {
      embedded.reserve(count);
      for (const auto& f : video.frames()) embedded.push_back(embed_frame(f));
      feats = embedded;
    }
    require(feats.size() == count, "need exactly one feature vector per frame");
  }

  SplitMix64 rng(seed);
  std::size_t anchor = 0;
  for (std::size_t b = 0; b + 2 < n; ++b) {
    const auto [lo, hi] = interior_interval(count, n, b);
    std::size_t pick = lo;
    switch (strategy) {
      case SelectionStrategy::cosine: {
        double best = cosine_similarity(feats[anchor], feats[lo]);
        for (std::size_t i = lo + 1; i <= hi; ++i) {
          const double s = cosine_similarity(feats[anchor], feats[i]);
          if (s < best) {
            best = s;
            pick = i;
          }
        }
        break;
      }
      case SelectionStrategy::mse: {
        double best = frame_mse(video.frame(anchor), video.frame(lo));
        for (std::size_t i = lo + 1; i <= hi; ++i) {
          const double d = frame_mse(video.frame(anchor), video.frame(i));
          if (d > best) {
            best = d;
            pick = i;
          }
        }
        break;
      }
      case SelectionStrategy::uniform:
        pick = lo + (hi - lo) / 2;
        break;
      case SelectionStrategy::random:
        pick = lo + static_cast<std::size_t>(rng.next() % (hi - lo + 1));
        break;
    }
    out.indices.push_back(pick);
    anchor = pick;
  }
  out.indices.push_back(count - 1);
  return out;
}

std::vector<ClipSpan> split_into_clips(const RawVideo& video, const KeyframeSet& keyframes) {
  const auto& idx = keyframes.indices;
  require(idx.size() >= 2 && idx.front() == 0 && idx.back() == video.frame_count() - 1,
          "keyframes must include the first and last frame");
  std::vector<ClipSpan> spans;
  spans.reserve(idx.size() - 1);
  for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
    require(idx[j] < idx[j + 1], "keyframe indices must be strictly increasing");
    spans.push_back({idx[j], idx[j + 1]});
  }
  return spans;
}

}  // namespace cmvc
