#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmvc/video.hpp"

namespace cmvc {

struct RdPoint {
  double rate = 0.0;        // bits per pixel
  double distortion = 0.0;  // metric value
  std::string metric_name = "psnr";
  bool higher_better = true;
};

struct RdCurve {
  std::vector<RdPoint> points;
};

/// Mean squared error over all samples of all frames (0..255 scale).
double mse(const RawVideo& a, const RawVideo& b);
/// 10 log10(255^2 / MSE); +infinity for identical videos.
double psnr(const RawVideo& a, const RawVideo& b);
/// Mean over consecutive frame pairs of the mean absolute sample difference.
double temporal_flicker(const RawVideo& v);

/// Bjontegaard delta rate in percent (negative: test spends fewer bits at
/// equal quality). Fits log10(rate) as a polynomial in distortion of degree
/// min(3, points - 1) and integrates both fits in closed form over the shared
/// distortion range.
double bd_rate(const RdCurve& anchor, const RdCurve& test);

/// Least-squares polynomial coefficients (ascending powers) of y over x.
std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree);
double polyval(std::span<const double> coeffs, double x);

enum class Metric { psnr, mse, flicker };

std::string_view to_string(Metric m) noexcept;
std::optional<Metric> parse_metric(std::string_view name) noexcept;
bool higher_is_better(Metric m) noexcept;
double evaluate_metric(Metric m, const RawVideo& decoded, const RawVideo& reference);

struct CodedResult {
  std::vector<std::uint8_t> stream;
  RawVideo decoded;
  RawVideo reference;
};

RdCurve assemble_curve(std::span<const CodedResult> results, Metric metric);

/// `video_id,metric_name,value` rows. Keyed by (video_id, metric_name).
using MetricTable = std::map<std::pair<std::string, std::string>, double>;
MetricTable load_metric_csv(const std::filesystem::path& path);
MetricTable parse_metric_csv(std::string_view text);

/// Curve from externally computed metric values: rates[i] belongs to video_ids[i].
RdCurve assemble_curve(std::span<const double> rates, std::span<const std::string> video_ids, const MetricTable& table,
                       const std::string& metric_name, bool higher_better);

/// `rate_bpp,distortion` header followed by rows.
RdCurve load_curve_csv(const std::filesystem::path& path);
RdCurve parse_curve_csv(std::string_view text);
std::string curve_to_csv(const RdCurve& curve);

/// Sorts by rate and checks the curve invariants (>= 2 points, strictly increasing rates, finite values).
void normalize_curve(RdCurve& curve);

}  // namespace cmvc
