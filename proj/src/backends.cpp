#include "cmvc/backends.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmvc/error.hpp"
#include "cmvc/external_backend.hpp"
#include "cmvc/hash.hpp"

namespace cmvc {

std::vector<double> blend_real(const Frame& left, const Frame& right, double wi) {
  require(left.same_geometry(right), "left and right keyframes differ in geometry");
  const auto a = left.samples();
  const auto b = right.samples();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = wi * a[i] + (1.0 - wi) * b[i];
  return out;
}

Frame quantize_frame(const std::vector<double>& samples, const Frame& like) {
  require(samples.size() == like.sample_count(), "sample count does not match frame geometry");
  std::vector<std::uint8_t> px(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::clamp(std::floor(samples[i] + 0.5), 0.0, 255.0));
  }
  return Frame(like.width(), like.height(), like.planes(), std::move(px));
}

Frame interpolate_frames(const Frame& left, const Frame& right, double wi) {
  require(wi >= 0.0 && wi <= 1.0, "wi must lie in [0, 1]");
  return quantize_frame(blend_real(left, right, wi), left);
}

AdapterState interpolate_adapters(const AdapterState& a0, const AdapterState& a1, double wl) {
  require(wl >= 0.0 && wl <= 1.0, "wl must lie in [0, 1]");
  require(a0.values.size() == a1.values.size(), "adapter dimensions differ");
  AdapterState out;
  out.values.resize(a0.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = wl * a0.values[i] + (1.0 - wl) * a1.values[i];
  return out;
}

Frame placeholder_frame(int width, int height, int planes, std::string_view keyframe_text,
                        std::string_view motion_text, std::size_t frame_index) {
  const std::uint8_t sep = 0;
  std::uint64_t seed = fnv1a64(keyframe_text);
  seed = fnv1a64(std::span(&sep, 1), seed);
  seed = fnv1a64(motion_text, seed);
  seed = fnv1a64(std::span(&sep, 1), seed);
  seed = fnv1a64(std::to_string(frame_index), seed);
  SplitMix64 rng(seed);
  Frame f(width, height, planes);
  for (auto& s : f.samples()) s = static_cast<std::uint8_t>(rng.next() >> 56);
  return f;
}

BackendSpec BackendSpec::parse(std::string_view text) {
  BackendSpec spec;
  if (text == "linear") {
    spec.kind = BackendKind::linear;
  } else if (text == "latent" || text == "latent-adapter") {
    spec.kind = BackendKind::latent_adapter;
  } else if (text.starts_with("external:") && text.size() > 9) {
    spec.kind = BackendKind::external;
    spec.command = std::string(text.substr(9));
  } else {
    fail(ErrorKind::config, "unknown backend '" + std::string(text) + "'");
  }
  return spec;
}

std::string BackendSpec::describe() const {
  switch (kind) {
    case BackendKind::linear: return "linear";
    case BackendKind::latent_adapter: return "latent";
    case BackendKind::external: return "external:" + command;
  }
  return "?";
}

void validate_request(const GenerationRequest& request) {
  require(request.left.same_geometry(request.right), "left and right keyframes differ in geometry");
  require(request.weights.wi.size() == request.intermediate_count &&
              request.weights.wl.size() == request.intermediate_count,
          "weight track length differs from the intermediate frame count");
}

std::vector<Frame> LinearBackend::generate(const GenerationRequest& request) {
  validate_request(request);
  std::vector<Frame> out;
  out.reserve(request.intermediate_count);
  for (double wi : request.weights.wi) out.push_back(interpolate_frames(request.left, request.right, wi));
  return out;
}

std::vector<double> LinearBackend::render(const Frame& left, const Frame& right, std::string_view, double wi, double,
                                          std::size_t, std::size_t) {
  return blend_real(left, right, wi);
}

// ---- latent adapter ---------------------------------------------------------

namespace {

int pad8(int v) { return (v + 7) / 8 * 8; }

}  // namespace

std::vector<double> to_latent(std::span<const double> samples, int width, int height, int planes) {
  const int pw = pad8(width);
  const int ph = pad8(height);
  const std::size_t plane_in = static_cast<std::size_t>(width) * height;
  const std::size_t plane_out = static_cast<std::size_t>(pw) * ph;
  std::vector<double> latent(plane_out * planes);
  for (int p = 0; p < planes; ++p) {
    const double* src = samples.data() + p * plane_in;
    double* dst = latent.data() + p * plane_out;
    for (int by = 0; by < ph; by += 8) {
      for (int bx = 0; bx < pw; bx += 8) {
        Block8 block{};
        for (int y = 0; y < 8; ++y) {
          const int sy = std::min(by + y, height - 1);
          for (int x = 0; x < 8; ++x) block[y * 8 + x] = src[static_cast<std::size_t>(sy) * width + std::min(bx + x, width - 1)];
        }
        forward_dct8(block);
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) dst[static_cast<std::size_t>(by + y) * pw + bx + x] = block[y * 8 + x];
        }
      }
    }
  }
  return latent;
}

std::vector<double> from_latent(std::span<const double> latent, int width, int height, int planes) {
  const int pw = pad8(width);
  const int ph = pad8(height);
  const std::size_t plane_in = static_cast<std::size_t>(pw) * ph;
  const std::size_t plane_out = static_cast<std::size_t>(width) * height;
  require(latent.size() == plane_in * planes, "latent size does not match geometry");
  std::vector<double> out(plane_out * planes);
  for (int p = 0; p < planes; ++p) {
    const double* src = latent.data() + p * plane_in;
    double* dst = out.data() + p * plane_out;
    for (int by = 0; by < ph; by += 8) {
      for (int bx = 0; bx < pw; bx += 8) {
        Block8 block{};
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) block[y * 8 + x] = src[static_cast<std::size_t>(by + y) * pw + bx + x];
        }
        inverse_dct8(block);
        for (int y = 0; y < 8 && by + y < height; ++y) {
          for (int x = 0; x < 8 && bx + x < width; ++x) dst[static_cast<std::size_t>(by + y) * width + bx + x] = block[y * 8 + x];
        }
      }
    }
  }
  return out;
}

std::vector<double> text_modulation_field(std::string_view text, std::size_t dimension) {
  SplitMix64 rng(fnv1a64(text));
  std::vector<double> d(dimension);
  double norm2 = 0.0;
  for (auto& v : d) {
    v = 2.0 * rng.next_unit() - 1.0;
    norm2 += v * v;
  }
  const double norm = std::sqrt(norm2);
  if (norm > 0.0) {
    for (auto& v : d) v /= norm;
  }
  return d;
}

std::vector<double> LatentAdapterBackend::render(const Frame& left, const Frame& right, std::string_view motion_text,
                                                 double wi, double wl, std::size_t t, std::size_t count) {
  require(left.same_geometry(right), "left and right keyframes differ in geometry");
  const int w = left.width();
  const int h = left.height();
  const int planes = left.planes();
  const std::vector<double> l(left.samples().begin(), left.samples().end());
  const std::vector<double> r(right.samples().begin(), right.samples().end());
  const auto z0 = to_latent(l, w, h, planes);
  const auto z1 = to_latent(r, w, h, planes);
  auto z = to_latent(blend_real(left, right, wi), w, h, planes);

  const double s = modulation_ == 0.0
                       ? 0.0
                       : std::sin(std::numbers::pi * double(t + 1) / double(count + 1)) * modulation_;
  std::vector<double> d;
  if (s != 0.0) d = text_modulation_field(motion_text, z.size());

  for (std::size_t k = 0; k < z.size(); ++k) {
    const double mean = 0.5 * (z0[k] + z1[k]);
    const double theta0 = z0[k] - mean;
    const double theta1 = z1[k] - mean;
    const double adapter = wl * theta0 + (1.0 - wl) * theta1;
    const double frame_part = wi * theta0 + (1.0 - wi) * theta1;
    z[k] += adapter - frame_part;
    if (s != 0.0) z[k] += s * d[k];
  }
  return from_latent(z, w, h, planes);
}

std::vector<Frame> LatentAdapterBackend::generate(const GenerationRequest& request) {
  validate_request(request);
  std::vector<Frame> out;
  out.reserve(request.intermediate_count);
  for (std::size_t t = 0; t < request.intermediate_count; ++t) {
    const double wi = request.weights.wi[t];
    const double wl = request.weights.wl[t];
    require(wi >= 0.0 && wi <= 1.0 && wl >= 0.0 && wl <= 1.0, "weights must lie in [0, 1]");
    out.push_back(quantize_frame(
        render(request.left, request.right, request.motion_text, wi, wl, t, request.intermediate_count),
        request.left));
  }
  return out;
}

std::unique_ptr<GenerationBackend> make_backend(const BackendSpec& spec) {
  switch (spec.kind) {
    case BackendKind::linear: return std::make_unique<LinearBackend>();
    case BackendKind::latent_adapter: return std::make_unique<LatentAdapterBackend>(spec.modulation);
    case BackendKind::external: return std::make_unique<ExternalBackend>(spec.command);
  }
  fail(ErrorKind::config, "unknown backend kind");
}

}  // namespace cmvc
