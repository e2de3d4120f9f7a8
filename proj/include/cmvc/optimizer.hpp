#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cmvc/backends.hpp"
#include "cmvc/codecs.hpp"
#include "cmvc/video.hpp"

namespace cmvc {

struct OptimizerConfig {
  double learning_rate = 0.001;
  std::size_t training_steps = 100;
  double fd_step = 1e-4;
  bool update_wi = true;
  bool update_wl = true;
  double convergence_eps = 1e-8;

  void validate() const;
};

/// Mean squared error with samples scaled to [0, 1].
double frame_loss(const Frame& candidate, const Frame& target);
double frame_loss(std::span<const double> candidate, std::span<const double> target);

struct TraceRow {
  std::size_t frame = 0;
  std::size_t step = 0;
  double wi = 0.0;
  double wl = 0.0;
  double loss = 0.0;
};

struct OptimizationResult {
  WeightTrack weights;
  /// loss_history[t][k]: loss of intermediate frame t before update k.
  std::vector<std::vector<double>> loss_history;
  std::vector<TraceRow> trace;
};

/// Real-valued target samples on the 0..255 scale, one vector per intermediate frame.
using RealFrame = std::vector<double>;

/// Gradient descent on (wi, wl) for each intermediate frame independently,
/// with central finite-difference gradients of the backend's real output.
/// Starts from `initial` or the linear schedule.
OptimizationResult optimize_weights(GenerationBackend& backend, const Frame& left, const Frame& right,
                                    std::span<const RealFrame> targets, const OptimizerConfig& cfg,
                                    std::string_view motion_text = {},
                                    const std::optional<WeightTrack>& initial = std::nullopt);

OptimizationResult optimize_weights(GenerationBackend& backend, const Frame& left, const Frame& right,
                                    std::span<const Frame> targets, const OptimizerConfig& cfg,
                                    std::string_view motion_text = {},
                                    const std::optional<WeightTrack>& initial = std::nullopt);

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> trace);

struct GradientReport {
  double finite_difference = 0.0;
  double analytic = 0.0;
  double relative_error = 0.0;
};

/// dD/dwi for the linear backend: (2/S) sum (blend - target)(left - right) / 255^2.
double analytic_linear_gradient(const Frame& left, const Frame& right, std::span<const double> target, double wi);

/// Compares the finite-difference and analytic dD/dwi on the linear backend.
GradientReport gradient_check(const Frame& left, const Frame& right, std::span<const double> target, double wi,
                              double fd_step = 1e-4);

}  // namespace cmvc
