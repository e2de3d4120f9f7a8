#include "cmvc/bitstream.hpp"

#include <zlib.h>

#include <algorithm>

#include "cmvc/error.hpp"

namespace cmvc {

std::string_view to_string(StreamMode m) noexcept { return m == StreamMode::tt2v ? "TT2V" : "IT2V"; }

std::optional<StreamMode> parse_mode(std::string_view name) noexcept {
  if (name == "TT2V" || name == "tt2v") return StreamMode::tt2v;
  if (name == "IT2V" || name == "it2v") return StreamMode::it2v;
  return std::nullopt;
}

std::string_view tag_name(SectionTag tag) noexcept {
  switch (tag) {
    case SectionTag::kimg: return "KIMG";
    case SectionTag::ktxt: return "KTXT";
    case SectionTag::mtxt: return "MTXT";
    case SectionTag::wgts: return "WGTS";
  }
  return "????";
}

namespace {

std::optional<SectionTag> tag_from_bytes(std::span<const std::uint8_t> b) {
  const std::string_view s(reinterpret_cast<const char*>(b.data()), 4);
  for (auto t : {SectionTag::kimg, SectionTag::ktxt, SectionTag::mtxt, SectionTag::wgts}) {
    if (s == tag_name(t)) return t;
  }
  return std::nullopt;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::malformed_stream, "stream is truncated");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
  }
  std::uint32_t u32() {
    auto b = take(4);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::span<const std::uint8_t>> ClipRecord::payloads(SectionTag tag) const {
  std::vector<std::span<const std::uint8_t>> out;
  for (const auto& s : sections) {
    if (s.tag == tag) out.emplace_back(s.payload);
  }
  return out;
}

std::size_t ClipRecord::count(SectionTag tag) const noexcept {
  return static_cast<std::size_t>(std::count_if(sections.begin(), sections.end(), [tag](const Section& s) { return s.tag == tag; }));
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

std::optional<std::string> check_structure(const StreamHeader& h, std::span<const ClipRecord> clips) {
  if (h.mode != StreamMode::tt2v && h.mode != StreamMode::it2v) return "unknown mode";
  if (h.width == 0 || h.height == 0) return "zero frame dimension";
  if (h.planes != 1 && h.planes != 3) return "planes must be 1 or 3";
  if (h.frame_count < 2) return "frame_count must be at least 2";
  if (h.frame_rate_num == 0 || h.frame_rate_den == 0) return "frame rate must be positive";
  if (h.clip_count < 1) return "clip_count must be at least 1";
  if (clips.size() != h.clip_count) return "clip_count does not match the number of clip records";
  if (clips.front().start_index != 0) return "first clip must start at frame 0";
  if (clips.back().end_index != h.frame_count - 1) return "last clip must end at the final frame";

  for (std::size_t j = 0; j < clips.size(); ++j) {
    const auto& c = clips[j];
    const bool last = j + 1 == clips.size();
    if (c.start_index >= c.end_index) return "clip " + std::to_string(j) + " has an empty span";
    if (!last && c.end_index != clips[j + 1].start_index) {
      return "clips " + std::to_string(j) + " and " + std::to_string(j + 1) + " do not share a boundary";
    }
    if (c.sections.size() > 0xff) return "too many sections in clip " + std::to_string(j);
    for (const auto& s : c.sections) {
      if (s.payload.size() > 0xffffffffULL) return "section payload exceeds 32-bit length";
    }
    const std::size_t kimg = c.count(SectionTag::kimg);
    const std::size_t ktxt = c.count(SectionTag::ktxt);
    const std::size_t mtxt = c.count(SectionTag::mtxt);
    const std::size_t wgts = c.count(SectionTag::wgts);
    const std::size_t keyframes = last ? 2 : 1;
    if (mtxt != 1) return "clip " + std::to_string(j) + " must carry exactly one MTXT";
    if (h.mode == StreamMode::tt2v) {
      if (kimg != 0 || wgts != 0) return "TT2V clip " + std::to_string(j) + " carries KIMG or WGTS";
      if (ktxt != keyframes) return "TT2V clip " + std::to_string(j) + " has the wrong number of KTXT sections";
    } else {
      if (ktxt != 0) return "IT2V clip " + std::to_string(j) + " carries KTXT";
      if (kimg != keyframes) return "IT2V clip " + std::to_string(j) + " has the wrong number of KIMG sections";
      if (wgts > 1) return "IT2V clip " + std::to_string(j) + " carries more than one WGTS";
    }
  }
  return std::nullopt;
}

std::vector<std::uint8_t> mux(const StreamHeader& header, std::span<const ClipRecord> clips) {
  if (auto problem = check_structure(header, clips)) fail(ErrorKind::contract, *problem);

  std::vector<std::uint8_t> out(kStreamMagic.begin(), kStreamMagic.end());
  out.push_back(kStreamVersion);
  out.push_back(static_cast<std::uint8_t>(header.mode));
  put_u16(out, header.width);
  put_u16(out, header.height);
  out.push_back(header.planes);
  put_u16(out, header.frame_count);
  put_u16(out, header.frame_rate_num);
  put_u16(out, header.frame_rate_den);
  put_u16(out, header.clip_count);
  out.push_back(0);  // reserved

  for (const auto& c : clips) {
    put_u16(out, c.start_index);
    put_u16(out, c.end_index);
    out.push_back(static_cast<std::uint8_t>(c.sections.size()));
    for (const auto& s : c.sections) {
      const auto name = tag_name(s.tag);
      out.insert(out.end(), name.begin(), name.end());
      put_u32(out, static_cast<std::uint32_t>(s.payload.size()));
      out.insert(out.end(), s.payload.begin(), s.payload.end());
    }
  }
  put_u32(out, crc32(out));
  return out;
}

Stream demux(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= kStreamMagic.size() && !std::equal(kStreamMagic.begin(), kStreamMagic.end(), bytes.begin())) {
    fail(ErrorKind::unsupported_stream, "bad magic");
  }
  if (bytes.size() < kStreamHeaderBytes + kCrcBytes) fail(ErrorKind::malformed_stream, "stream is truncated");
  if (bytes[4] != kStreamVersion) fail(ErrorKind::unsupported_stream, "unsupported version " + std::to_string(bytes[4]));

  Reader r(bytes.first(bytes.size() - kCrcBytes));
  r.take(5);
  Stream s;
  auto& h = s.header;
  const std::uint8_t mode = r.u8();
  if (mode > 1) fail(ErrorKind::malformed_stream, "unknown mode " + std::to_string(mode));
  h.mode = static_cast<StreamMode>(mode);
  h.width = r.u16();
  h.height = r.u16();
  h.planes = r.u8();
  h.frame_count = r.u16();
  h.frame_rate_num = r.u16();
  h.frame_rate_den = r.u16();
  h.clip_count = r.u16();
  if (r.u8() != 0) fail(ErrorKind::malformed_stream, "reserved header byte is not zero");

  s.clips.reserve(h.clip_count);
  for (std::size_t j = 0; j < h.clip_count; ++j) {
    ClipRecord c;
    c.start_index = r.u16();
    c.end_index = r.u16();
    const std::size_t sections = r.u8();
    for (std::size_t k = 0; k < sections; ++k) {
      const auto tag = tag_from_bytes(r.take(4));
      if (!tag) fail(ErrorKind::malformed_stream, "unknown section tag");
      const std::uint32_t len = r.u32();
      const auto payload = r.take(len);
      c.sections.push_back({*tag, std::vector<std::uint8_t>(payload.begin(), payload.end())});
    }
    s.clips.push_back(std::move(c));
  }
  if (r.remaining() != 0) fail(ErrorKind::malformed_stream, "trailing bytes before the CRC");

  const auto tail = bytes.last(kCrcBytes);
  const std::uint32_t stored =
      (std::uint32_t(tail[0]) << 24) | (std::uint32_t(tail[1]) << 16) | (std::uint32_t(tail[2]) << 8) | tail[3];
  if (stored != crc32(bytes.first(bytes.size() - kCrcBytes))) fail(ErrorKind::corrupt_stream, "CRC mismatch");

  if (auto problem = check_structure(s.header, s.clips)) fail(ErrorKind::malformed_stream, *problem);
  return s;
}

RateBreakdown rate_breakdown(const StreamHeader& header, std::span<const ClipRecord> clips) {
  (void)header;
  RateBreakdown r;
  std::uint64_t overhead = kStreamHeaderBytes + kCrcBytes;
  for (const auto& c : clips) {
    overhead += kClipOverheadBytes;
    for (const auto& s : c.sections) {
      overhead += kSectionOverheadBytes;
      const std::uint64_t bits = 8ULL * s.payload.size();
      switch (s.tag) {
        case SectionTag::kimg:
        case SectionTag::ktxt: r.keyframe_bits += bits; break;
        case SectionTag::mtxt: r.motion_bits += bits; break;
        case SectionTag::wgts: r.weight_bits += bits; break;
      }
    }
  }
  r.header_bits = 8 * overhead;
  r.total_bits = r.keyframe_bits + r.motion_bits + r.weight_bits + r.header_bits;
  return r;
}

}  // namespace cmvc
