#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cmvc/codecs.hpp"
#include "cmvc/video.hpp"

namespace cmvc {

struct GenerationRequest {
  Frame left;
  Frame right;
  std::string motion_text;
  WeightTrack weights;
  std::size_t intermediate_count = 0;
};

/// Flattened latent residual standing in for adapter (LoRA) parameters.
struct AdapterState {
  std::vector<double> values;
};

/// Real-valued blend wi*left + (1-wi)*right, no rounding.
std::vector<double> blend_real(const Frame& left, const Frame& right, double wi);

/// Per-sample blend rounded half-up and clamped to [0, 255].
Frame interpolate_frames(const Frame& left, const Frame& right, double wi);

AdapterState interpolate_adapters(const AdapterState& a0, const AdapterState& a1, double wl);

/// Rounds half-up and clamps real samples into a frame shaped like `like`.
Frame quantize_frame(const std::vector<double>& samples, const Frame& like);

/// Deterministic stand-in for a text-only generated frame.
Frame placeholder_frame(int width, int height, int planes, std::string_view keyframe_text,
                        std::string_view motion_text, std::size_t frame_index);

enum class BackendKind { linear, latent_adapter, external };

struct BackendSpec {
  BackendKind kind = BackendKind::linear;
  std::string command;             // external only
  double modulation = 0.0;         // latent-adapter text modulation amplitude

  /// "linear", "latent", or "external:<command>".
  static BackendSpec parse(std::string_view text);
  std::string describe() const;
};

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  /// Synthesizes the request's intermediate frames.
  virtual std::vector<Frame> generate(const GenerationRequest& request) = 0;

  /// Real-valued samples (pre-rounding) of intermediate frame `t` out of
  /// `count`, for the given weights. Used by the encoder-side optimizer.
  virtual std::vector<double> render(const Frame& left, const Frame& right, std::string_view motion_text,
                                     double wi, double wl, std::size_t t, std::size_t count) = 0;

  virtual std::string_view name() const noexcept = 0;
};

class LinearBackend final : public GenerationBackend {
 public:
  std::vector<Frame> generate(const GenerationRequest& request) override;
  std::vector<double> render(const Frame& left, const Frame& right, std::string_view motion_text, double wi,
                             double wl, std::size_t t, std::size_t count) override;
  std::string_view name() const noexcept override { return "linear"; }
};

/// Blends in the 8x8 block-DCT domain with separate frame (wi) and adapter
/// (wl) weights, plus an optional text-seeded modulation field.
class LatentAdapterBackend final : public GenerationBackend {
 public:
  explicit LatentAdapterBackend(double modulation = 0.0) : modulation_(modulation) {}

  std::vector<Frame> generate(const GenerationRequest& request) override;
  std::vector<double> render(const Frame& left, const Frame& right, std::string_view motion_text, double wi,
                             double wl, std::size_t t, std::size_t count) override;
  std::string_view name() const noexcept override { return "latent"; }

  double modulation() const noexcept { return modulation_; }

 private:
  double modulation_;
};

std::unique_ptr<GenerationBackend> make_backend(const BackendSpec& spec);

void validate_request(const GenerationRequest& request);

// Block-DCT latent helpers; latents live on the frame padded to multiples of 8.
std::vector<double> to_latent(std::span<const double> samples, int width, int height, int planes);
std::vector<double> from_latent(std::span<const double> latent, int width, int height, int planes);
/// Unit-norm pseudorandom latent field seeded by the FNV-1a hash of `text`.
std::vector<double> text_modulation_field(std::string_view text, std::size_t dimension);

}  // namespace cmvc
