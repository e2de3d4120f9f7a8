#pragma once

// Independent reference computations used by the unit and acceptance suites.
// Nothing here calls into the code path it is used to check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "cmvc/eval.hpp"
#include "cmvc/hash.hpp"
#include "cmvc/keyframes.hpp"
#include "cmvc/video.hpp"

namespace cmvc::oracle {

/// Cosine-strategy keyframe selection by exhaustive scoring of every
/// candidate. Partition bounds are recomputed with plain real arithmetic and
/// the similarity is evaluated from scratch.
inline std::vector<std::size_t> cosine_keyframes(const std::vector<FeatureVector>& feats, std::size_t n) {
  const std::size_t count = feats.size();
  std::vector<std::size_t> out{0};
  auto similarity = [&](std::size_t a, std::size_t b) {
    long double dot = 0, na = 0, nb = 0;
    for (std::size_t k = 0; k < feats[a].values.size(); ++k) {
      dot += (long double)feats[a].values[k] * feats[b].values[k];
      na += (long double)feats[a].values[k] * feats[a].values[k];
      nb += (long double)feats[b].values[k] * feats[b].values[k];
    }
    return (double)(dot / std::sqrt(na * nb));
  };
  std::size_t anchor = 0;
  for (std::size_t b = 0; b + 2 < n; ++b) {
    const double width = double(count - 2) / double(n - 2);
    std::size_t lo = 1 + static_cast<std::size_t>(std::floor(b * width + 1e-9));
    std::size_t hi = static_cast<std::size_t>(std::floor((b + 1) * width + 1e-9));
    std::vector<double> scores;
    for (std::size_t i = lo; i <= hi; ++i) scores.push_back(similarity(anchor, i));
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      // Scores within rounding of each other count as ties; lowest index wins.
      if (scores[i] < scores[best] - 1e-12) best = i;
    }
    anchor = lo + best;
    out.push_back(anchor);
  }
  out.push_back(count - 1);
  return out;
}

/// Lagrange interpolant of log10(rate) over distortion. For 4 points this is
/// the cubic through them; for 3 the quadratic.
inline double lagrange_log_rate(const RdCurve& c, double d) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    double term = std::log10(c.points[i].rate);
    for (std::size_t j = 0; j < c.points.size(); ++j) {
      if (j != i) term *= (d - c.points[j].distortion) / (c.points[i].distortion - c.points[j].distortion);
    }
    s += term;
  }
  return s;
}

/// BD-Rate via dense trapezoid integration over a `samples`-point grid.
inline double bd_rate_trapezoid(const RdCurve& anchor, const RdCurve& test, int samples = 1000) {
  auto range = [](const RdCurve& c) {
    double lo = c.points.front().distortion, hi = lo;
    for (const auto& p : c.points) {
      lo = std::min(lo, p.distortion);
      hi = std::max(hi, p.distortion);
    }
    return std::pair{lo, hi};
  };
  const auto [al, ah] = range(anchor);
  const auto [tl, th] = range(test);
  const double lo = std::max(al, tl);
  const double hi = std::min(ah, th);
  const double step = (hi - lo) / (samples - 1);
  double ia = 0.0, it = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double d = lo + k * step;
    const double w = (k == 0 || k == samples - 1) ? 0.5 : 1.0;
    ia += w * lagrange_log_rate(anchor, d);
    it += w * lagrange_log_rate(test, d);
  }
  ia *= step;
  it *= step;
  return (std::pow(10.0, (it - ia) / (hi - lo)) - 1.0) * 100.0;
}

/// Random 4-point curve with strictly increasing rate and PSNR-like distortion.
inline RdCurve random_curve(SplitMix64& rng, double d_lo, double d_hi, double rate_scale) {
  RdCurve c;
  double rate = rate_scale * (0.5 + rng.next_unit());
  for (int i = 0; i < 4; ++i) {
    const double d = d_lo + (d_hi - d_lo) * i / 3.0 + (rng.next_unit() - 0.5) * 0.4;
    c.points.push_back({rate, d, "psnr", true});
    rate *= 1.5 + rng.next_unit();
  }
  return c;
}

inline Frame random_frame(SplitMix64& rng, int w, int h, int planes = 1, int lo = 0, int hi = 255) {
  Frame f(w, h, planes);
  for (auto& s : f.samples()) s = static_cast<std::uint8_t>(lo + rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
  return f;
}

}  // namespace cmvc::oracle
