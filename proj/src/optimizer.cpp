#include "cmvc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "cmvc/error.hpp"

namespace cmvc {

void OptimizerConfig::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning rate must be positive");
  require(training_steps >= 1, "training_steps must be at least 1");
  require(fd_step > 0.0 && std::isfinite(fd_step), "finite-difference step must be positive");
  require(convergence_eps >= 0.0, "convergence_eps must be non-negative");
}

double frame_loss(std::span<const double> candidate, std::span<const double> target) {
  require(candidate.size() == target.size() && !candidate.empty(), "loss operands differ in size");
  double acc = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const double d = (candidate[i] - target[i]) / 255.0;
    acc += d * d;
  }
  return acc / static_cast<double>(candidate.size());
}

double frame_loss(const Frame& candidate, const Frame& target) {
  require(candidate.same_geometry(target), "loss operands differ in geometry");
  const std::vector<double> a(candidate.samples().begin(), candidate.samples().end());
  const std::vector<double> b(target.samples().begin(), target.samples().end());
  return frame_loss(a, b);
}

namespace {

struct FrameObjective {
  GenerationBackend& backend;
  const Frame& left;
  const Frame& right;
  std::string_view text;
  const RealFrame& target;
  std::size_t t;
  std::size_t count;

  double operator()(double wi, double wl) const {
    const double d = frame_loss(backend.render(left, right, text, wi, wl, t, count), target);
    if (!std::isfinite(d)) fail(ErrorKind::numerical_failure, "non-finite loss");
    return d;
  }
};

}  // namespace

OptimizationResult optimize_weights(GenerationBackend& backend, const Frame& left, const Frame& right,
                                    std::span<const RealFrame> targets, const OptimizerConfig& cfg,
                                    std::string_view motion_text, const std::optional<WeightTrack>& initial) {
  cfg.validate();
  require(left.same_geometry(right), "left and right keyframes differ in geometry");
  const std::size_t count = targets.size();
  for (const auto& t : targets) require(t.size() == left.sample_count(), "target size differs from keyframe size");

  OptimizationResult result;
  result.weights = initial ? *initial : linear_schedule(count);
  require(result.weights.wi.size() == count && result.weights.wl.size() == count,
          "initial weight track length differs from the target count");
  result.loss_history.resize(count);

  for (std::size_t t = 0; t < count; ++t) {
    double& wi = result.weights.wi[t];
    double& wl = result.weights.wl[t];
    auto& history = result.loss_history[t];
    if (!cfg.update_wi && !cfg.update_wl) continue;

    const FrameObjective loss{backend, left, right, motion_text, targets[t], t, count};
    const double h = cfg.fd_step;
    for (std::size_t step = 0;; ++step) {
      const double d = loss(wi, wl);
      history.push_back(d);
      result.trace.push_back({t, step, wi, wl, d});
      if (d == 0.0) break;
      if (step > 0 && std::abs(d - history[step - 1]) < cfg.convergence_eps) break;
      if (step == cfg.training_steps) break;

      double grad_i = 0.0;
      double grad_l = 0.0;
      if (cfg.update_wi) grad_i = (loss(wi + h, wl) - loss(wi - h, wl)) / (2.0 * h);
      if (cfg.update_wl) grad_l = (loss(wi, wl + h) - loss(wi, wl - h)) / (2.0 * h);
      if (!std::isfinite(grad_i) || !std::isfinite(grad_l)) fail(ErrorKind::numerical_failure, "non-finite gradient");
      wi = std::clamp(wi - cfg.learning_rate * grad_i, 0.0, 1.0);
      wl = std::clamp(wl - cfg.learning_rate * grad_l, 0.0, 1.0);
    }
  }
  return result;
}

OptimizationResult optimize_weights(GenerationBackend& backend, const Frame& left, const Frame& right,
                                    std::span<const Frame> targets, const OptimizerConfig& cfg,
                                    std::string_view motion_text, const std::optional<WeightTrack>& initial) {
  std::vector<RealFrame> real;
  real.reserve(targets.size());
  for (const auto& f : targets) {
    require(f.same_geometry(left), "target geometry differs from keyframe geometry");
    real.emplace_back(f.samples().begin(), f.samples().end());
  }
  return optimize_weights(backend, left, right, std::span<const RealFrame>(real), cfg, motion_text, initial);
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> trace) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::malformed_input, "cannot write " + path.string());
  out << "frame,step,wi,wl,loss\n" << std::setprecision(17);
  for (const auto& r : trace) out << r.frame << ',' << r.step << ',' << r.wi << ',' << r.wl << ',' << r.loss << '\n';
}

double analytic_linear_gradient(const Frame& left, const Frame& right, std::span<const double> target, double wi) {
  require(left.same_geometry(right) && target.size() == left.sample_count(), "gradient operands differ in size");
  const auto a = left.samples();
  const auto b = right.samples();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double blended = wi * a[i] + (1.0 - wi) * b[i];
    acc += (blended - target[i]) * (double(a[i]) - double(b[i]));
  }
  return 2.0 * acc / (static_cast<double>(a.size()) * 255.0 * 255.0);
}

GradientReport gradient_check(const Frame& left, const Frame& right, std::span<const double> target, double wi,
                              double fd_step) {
  LinearBackend backend;
  auto loss = [&](double w) { return frame_loss(backend.render(left, right, {}, w, w, 0, 1), target); };
  GradientReport r;
  r.finite_difference = (loss(wi + fd_step) - loss(wi - fd_step)) / (2.0 * fd_step);
  r.analytic = analytic_linear_gradient(left, right, target, wi);
  const double scale = std::max(std::abs(r.analytic), std::abs(r.finite_difference));
  r.relative_error = scale < 1e-12 ? 0.0 : std::abs(r.finite_difference - r.analytic) / scale;
  return r;
}

}  // namespace cmvc
