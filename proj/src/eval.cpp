#include "cmvc/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmvc/error.hpp"

namespace cmvc {

namespace {

void require_same_shape(const RawVideo& a, const RawVideo& b) {
  require(a.width() == b.width() && a.height() == b.height() && a.planes() == b.planes() &&
              a.frame_count() == b.frame_count(),
          "videos differ in geometry or length");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(ErrorKind::malformed_input, "cannot parse " + what + " '" + s + "'");
  }
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::malformed_input, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    auto line = trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (!line.empty() && line.front() != '#') out.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

}  // namespace

double mse(const RawVideo& a, const RawVideo& b) {
  require_same_shape(a, b);
  std::uint64_t acc = 0;
  std::uint64_t n = 0;
  for (std::size_t f = 0; f < a.frame_count(); ++f) {
    const auto sa = a.frame(f).samples();
    const auto sb = b.frame(f).samples();
    for (std::size_t i = 0; i < sa.size(); ++i) {
      const int d = int(sa[i]) - int(sb[i]);
      acc += static_cast<std::uint64_t>(d * d);
    }
    n += sa.size();
  }
  return static_cast<double>(acc) / static_cast<double>(n);
}

double psnr(const RawVideo& a, const RawVideo& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

double temporal_flicker(const RawVideo& v) {
  double total = 0.0;
  for (std::size_t f = 1; f < v.frame_count(); ++f) {
    const auto a = v.frame(f - 1).samples();
    const auto b = v.frame(f).samples();
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<std::uint64_t>(std::abs(int(a[i]) - int(b[i])));
    total += static_cast<double>(acc) / static_cast<double>(a.size());
  }
  return total / static_cast<double>(v.frame_count() - 1);
}

std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree) {
  require(x.size() == y.size() && degree >= 0 && x.size() > static_cast<std::size_t>(degree),
          "polyfit needs more points than the degree");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd vander(n, degree + 1);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      vander(i, k) = p;
      p *= x[i];
    }
    rhs(i) = y[i];
  }
  const Eigen::VectorXd c = vander.colPivHouseholderQr().solve(rhs);
  return std::vector<double>(c.data(), c.data() + c.size());
}

double polyval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

namespace {

void check_bd_curve(const RdCurve& c, const char* which) {
  require(c.points.size() >= 3, std::string(which) + " curve needs at least 3 points for BD-Rate");
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto& p = c.points[i];
    require(p.rate > 0.0 && std::isfinite(p.rate) && std::isfinite(p.distortion),
            std::string(which) + " curve has a non-positive rate or non-finite value");
    if (i > 0) require(p.rate > c.points[i - 1].rate, std::string(which) + " curve rates must strictly increase");
  }
  const bool up = c.points[1].distortion > c.points[0].distortion;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const double d = c.points[i].distortion - c.points[i - 1].distortion;
    require(up ? d > 0.0 : d < 0.0, std::string(which) + " curve distortion is not strictly monotone in rate");
  }
}

// Integral of the fitted log10(rate)-vs-distortion polynomial over [lo, hi].
// The fit runs on distortion normalized to [-1, 1] for conditioning.
double integrate_log_rate(const RdCurve& c, double lo, double hi) {
  std::vector<double> d;
  std::vector<double> lr;
  for (const auto& p : c.points) {
    d.push_back(p.distortion);
    lr.push_back(std::log10(p.rate));
  }
  const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  const double center = 0.5 * (*mn + *mx);
  const double scale = 0.5 * (*mx - *mn);
  for (auto& v : d) v = (v - center) / scale;
  const int degree = static_cast<int>(std::min<std::size_t>(3, c.points.size() - 1));
  const auto coeffs = polyfit(d, lr, degree);
  std::vector<double> anti(coeffs.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs.size(); ++k) anti[k + 1] = coeffs[k] / double(k + 1);
  const double ulo = (lo - center) / scale;
  const double uhi = (hi - center) / scale;
  return scale * (polyval(anti, uhi) - polyval(anti, ulo));
}

}  // namespace

double bd_rate(const RdCurve& anchor, const RdCurve& test) {
  check_bd_curve(anchor, "anchor");
  check_bd_curve(test, "test");
  auto range = [](const RdCurve& c) {
    const auto [a, b] = std::minmax_element(c.points.begin(), c.points.end(),
                                            [](const RdPoint& x, const RdPoint& y) { return x.distortion < y.distortion; });
    return std::pair{a->distortion, b->distortion};
  };
  const auto [amin, amax] = range(anchor);
  const auto [tmin, tmax] = range(test);
  const double lo = std::max(amin, tmin);
  const double hi = std::min(amax, tmax);
  if (!(lo < hi)) fail(ErrorKind::no_overlap, "curves share no distortion range");
  const double diff = (integrate_log_rate(test, lo, hi) - integrate_log_rate(anchor, lo, hi)) / (hi - lo);
  return (std::pow(10.0, diff) - 1.0) * 100.0;
}

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::psnr: return "psnr";
    case Metric::mse: return "mse";
    case Metric::flicker: return "flicker";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) noexcept {
  for (auto m : {Metric::psnr, Metric::mse, Metric::flicker}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

bool higher_is_better(Metric m) noexcept { return m == Metric::psnr; }

double evaluate_metric(Metric m, const RawVideo& decoded, const RawVideo& reference) {
  switch (m) {
    case Metric::psnr: return psnr(decoded, reference);
    case Metric::mse: return mse(decoded, reference);
    case Metric::flicker:
      require_same_shape(decoded, reference);
      return temporal_flicker(decoded);
  }
  return 0.0;
}

void normalize_curve(RdCurve& curve) {
  require(curve.points.size() >= 2, "a curve needs at least 2 points");
  std::sort(curve.points.begin(), curve.points.end(), [](const RdPoint& a, const RdPoint& b) { return a.rate < b.rate; });
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    require(p.rate > 0.0 && std::isfinite(p.rate), "curve rates must be positive");
    require(std::isfinite(p.distortion), "curve distortions must be finite");
    require(p.metric_name == curve.points.front().metric_name, "curve mixes metrics");
    if (i > 0) require(p.rate > curve.points[i - 1].rate, "duplicate rates in curve");
  }
}

RdCurve assemble_curve(std::span<const CodedResult> results, Metric metric) {
  require(results.size() >= 2, "a curve needs at least 2 results");
  RdCurve curve;
  for (const auto& r : results) {
    require(r.reference.width() == results.front().reference.width() &&
                r.reference.height() == results.front().reference.height(),
            "results use different reference geometries");
    curve.points.push_back({compute_bpp(8ULL * r.stream.size(), r.reference),
                            evaluate_metric(metric, r.decoded, r.reference), std::string(to_string(metric)),
                            higher_is_better(metric)});
  }
  normalize_curve(curve);
  return curve;
}

MetricTable parse_metric_csv(std::string_view text) {
  MetricTable table;
  for (const auto& line : lines_of(text)) {
    const auto cols = split_csv(line);
    if (cols.size() != 3) fail(ErrorKind::malformed_input, "metric row needs 3 columns: '" + line + "'");
    if (cols[0] == "video_id" && cols[1] == "metric_name") continue;
    table[{cols[0], cols[1]}] = parse_double(cols[2], "metric value");
  }
  return table;
}

MetricTable load_metric_csv(const std::filesystem::path& path) { return parse_metric_csv(slurp(path)); }

RdCurve assemble_curve(std::span<const double> rates, std::span<const std::string> video_ids, const MetricTable& table,
                       const std::string& metric_name, bool higher_better) {
  require(rates.size() == video_ids.size(), "one rate per video id is required");
  RdCurve curve;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const auto it = table.find({video_ids[i], metric_name});
    if (it == table.end()) {
      fail(ErrorKind::malformed_input, "no " + metric_name + " value for video '" + video_ids[i] + "'");
    }
    curve.points.push_back({rates[i], it->second, metric_name, higher_better});
  }
  normalize_curve(curve);
  return curve;
}

RdCurve parse_curve_csv(std::string_view text) {
  RdCurve curve;
  bool first = true;
  for (const auto& line : lines_of(text)) {
    const auto cols = split_csv(line);
    if (first && !cols.empty() && cols[0] == "rate_bpp") {
      first = false;
      continue;
    }
    first = false;
    if (cols.size() != 2) fail(ErrorKind::malformed_input, "curve row needs 2 columns: '" + line + "'");
    curve.points.push_back({parse_double(cols[0], "rate"), parse_double(cols[1], "distortion"), "distortion", true});
  }
  if (curve.points.size() < 2) fail(ErrorKind::malformed_input, "curve file holds fewer than 2 points");
  normalize_curve(curve);
  return curve;
}

RdCurve load_curve_csv(const std::filesystem::path& path) { return parse_curve_csv(slurp(path)); }

std::string curve_to_csv(const RdCurve& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "rate_bpp,distortion\n";
  for (const auto& p : curve.points) out << p.rate << ',' << p.distortion << '\n';
  return out.str();
}

}  // namespace cmvc
