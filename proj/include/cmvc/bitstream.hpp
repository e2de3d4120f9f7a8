#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmvc {

enum class StreamMode : std::uint8_t { tt2v = 0, it2v = 1 };

std::string_view to_string(StreamMode m) noexcept;
std::optional<StreamMode> parse_mode(std::string_view name) noexcept;

inline constexpr std::array<std::uint8_t, 4> kStreamMagic = {'C', 'M', 'V', 'C'};
inline constexpr std::uint8_t kStreamVersion = 1;

inline constexpr std::size_t kStreamHeaderBytes = 20;
inline constexpr std::size_t kClipOverheadBytes = 5;     // u16 start, u16 end, u8 section count
inline constexpr std::size_t kSectionOverheadBytes = 8;  // 4-byte tag, u32 length
inline constexpr std::size_t kCrcBytes = 4;

struct StreamHeader {
  StreamMode mode = StreamMode::it2v;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t planes = 1;
  std::uint16_t frame_count = 0;
  std::uint16_t frame_rate_num = 30;
  std::uint16_t frame_rate_den = 1;
  std::uint16_t clip_count = 0;

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

enum class SectionTag : std::uint8_t { kimg, ktxt, mtxt, wgts };

std::string_view tag_name(SectionTag tag) noexcept;  // "KIMG", ...

struct Section {
  SectionTag tag = SectionTag::mtxt;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Section&, const Section&) = default;
};

struct ClipRecord {
  std::uint16_t start_index = 0;
  std::uint16_t end_index = 0;
  std::vector<Section> sections;

  /// Payloads carrying `tag`, in stream order.
  std::vector<std::span<const std::uint8_t>> payloads(SectionTag tag) const;
  std::size_t count(SectionTag tag) const noexcept;

  friend bool operator==(const ClipRecord&, const ClipRecord&) = default;
};

struct Stream {
  StreamHeader header;
  std::vector<ClipRecord> clips;

  friend bool operator==(const Stream&, const Stream&) = default;
};

/// Itemized container bits: keyframe = KIMG + KTXT, motion = MTXT,
/// weights = WGTS, header = everything else (fixed header, tags, lengths, CRC).
struct RateBreakdown {
  std::uint64_t keyframe_bits = 0;
  std::uint64_t motion_bits = 0;
  std::uint64_t weight_bits = 0;
  std::uint64_t header_bits = 0;
  std::uint64_t total_bits = 0;
};

/// Returns a description of the first structural violation, if any.
std::optional<std::string> check_structure(const StreamHeader& header, std::span<const ClipRecord> clips);

std::vector<std::uint8_t> mux(const StreamHeader& header, std::span<const ClipRecord> clips);
Stream demux(std::span<const std::uint8_t> bytes);

RateBreakdown rate_breakdown(const StreamHeader& header, std::span<const ClipRecord> clips);

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace cmvc
