#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmvc/video.hpp"

namespace cmvc {

// ---- text ------------------------------------------------------------------

inline constexpr std::size_t kMaxTextBytes = 65535;

bool is_valid_utf8(std::string_view text) noexcept;

/// 2-byte big-endian length followed by the adaptive arithmetic-coded bytes.
std::vector<std::uint8_t> encode_text(std::string_view text);
std::string decode_text(std::span<const std::uint8_t> payload);

// ---- keyframe images --------------------------------------------------------

/// Keyframe quality tier: 64 (low), 128 (medium), 256 (high).
enum class QualityFactor : std::uint16_t { low = 64, medium = 128, high = 256 };

std::optional<QualityFactor> quality_from_int(int q) noexcept;
/// Quantizer step: 2048 / q.
double quantizer_step(QualityFactor q) noexcept;

/// Block-DCT transform codec; frames with sides that are not multiples of 8 are
/// edge-padded and cropped back on decode.
std::vector<std::uint8_t> encode_keyframe(const Frame& frame, QualityFactor q);
Frame decode_keyframe(std::span<const std::uint8_t> payload);
/// Decode and check the geometry against what the container promised.
Frame decode_keyframe(std::span<const std::uint8_t> payload, int width, int height, int planes);

// 8x8 orthonormal DCT-II helpers, also used by the latent-adapter backend.
using Block8 = std::array<double, 64>;
void forward_dct8(Block8& block) noexcept;
void inverse_dct8(Block8& block) noexcept;
extern const std::array<std::uint8_t, 64> kZigzag;

// ---- interpolation weights --------------------------------------------------

struct WeightTrack {
  std::vector<double> wi;
  std::vector<double> wl;

  std::size_t size() const noexcept { return wi.size(); }
  friend bool operator==(const WeightTrack&, const WeightTrack&) = default;
};

/// The uncorrected schedule wi = wl = 1 - (t+1)/(count+1).
WeightTrack linear_schedule(std::size_t intermediate_count);

/// 2-byte count, then (wi, wl) pairs as big-endian round(w * 65535).
std::vector<std::uint8_t> encode_weights(const WeightTrack& w);
WeightTrack decode_weights(std::span<const std::uint8_t> payload);

}  // namespace cmvc
