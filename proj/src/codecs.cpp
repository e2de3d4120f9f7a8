#include "cmvc/codecs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmvc/arith_coder.hpp"
#include "cmvc/error.hpp"

namespace cmvc {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint32_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t(b[at]) << 8) | b[at + 1];
}

}  // namespace

// ---- text ------------------------------------------------------------------

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  while (i < text.size()) {
    const unsigned char c = s[i];
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      extra = 1;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      extra = 2;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((s[i + k] & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3f);
    }
    static constexpr std::uint32_t kMinForLength[4] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[extra] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
    i += extra + 1;
  }
  return true;
}

std::vector<std::uint8_t> encode_text(std::string_view text) {
  require(text.size() <= kMaxTextBytes, "text longer than 65535 bytes");
  require(is_valid_utf8(text), "text is not valid UTF-8");
  std::vector<std::uint8_t> out;
  put_u16(out, static_cast<std::uint32_t>(text.size()));
  if (text.empty()) return out;
  AdaptiveModel model(256);
  ArithmeticEncoder enc;
  for (unsigned char c : text) enc.encode(model, c);
  const auto body = enc.finish();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::string decode_text(std::span<const std::uint8_t> payload) {
  if (payload.size() < 2) fail(ErrorKind::malformed_payload, "text payload shorter than its length field");
  const std::size_t length = get_u16(payload, 0);
  const auto body = payload.subspan(2);
  if (length == 0) {
    if (!body.empty()) fail(ErrorKind::malformed_payload, "empty text carries a coded body");
    return {};
  }
  AdaptiveModel model(256);
  ArithmeticDecoder dec(body);
  std::string text;
  text.reserve(length);
  for (std::size_t i = 0; i < length; ++i) text.push_back(static_cast<char>(dec.decode(model)));
  dec.finish();
  if (!is_valid_utf8(text)) fail(ErrorKind::malformed_payload, "decoded text is not valid UTF-8");
  return text;
}

// ---- DCT -------------------------------------------------------------------

namespace {

struct DctTable {
  double c[8][8];  // c[k][n] = alpha(k) cos((2n+1) k pi / 16)
  DctTable() {
    for (int k = 0; k < 8; ++k) {
      const double alpha = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) c[k][n] = alpha * std::cos((2 * n + 1) * k * std::numbers::pi / 16.0);
    }
  }
};

const DctTable& dct_table() {
  static const DctTable table;
  return table;
}

}  // namespace

const std::array<std::uint8_t, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

void forward_dct8(Block8& block) noexcept {
  const auto& t = dct_table();
  Block8 tmp{};
  for (int y = 0; y < 8; ++y) {
    for (int k = 0; k < 8; ++k) {
      double s = 0.0;
      for (int n = 0; n < 8; ++n) s += t.c[k][n] * block[y * 8 + n];
      tmp[y * 8 + k] = s;
    }
  }
  for (int x = 0; x < 8; ++x) {
    for (int k = 0; k < 8; ++k) {
      double s = 0.0;
      for (int n = 0; n < 8; ++n) s += t.c[k][n] * tmp[n * 8 + x];
      block[k * 8 + x] = s;
    }
  }
}

void inverse_dct8(Block8& block) noexcept {
  const auto& t = dct_table();
  Block8 tmp{};
  for (int y = 0; y < 8; ++y) {
    for (int n = 0; n < 8; ++n) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += t.c[k][n] * block[y * 8 + k];
      tmp[y * 8 + n] = s;
    }
  }
  for (int x = 0; x < 8; ++x) {
    for (int n = 0; n < 8; ++n) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += t.c[k][n] * tmp[k * 8 + x];
      block[n * 8 + x] = s;
    }
  }
}

// ---- keyframe images --------------------------------------------------------

std::optional<QualityFactor> quality_from_int(int q) noexcept {
  switch (q) {
    case 64: return QualityFactor::low;
    case 128: return QualityFactor::medium;
    case 256: return QualityFactor::high;
    default: return std::nullopt;
  }
}

double quantizer_step(QualityFactor q) noexcept { return 2048.0 / static_cast<double>(q); }

namespace {

constexpr std::size_t kImageHeaderBytes = 7;  // u16 width, u16 height, u8 planes, u16 q
constexpr std::size_t kEndOfBlock = 0x00;
constexpr std::size_t kZeroRun16 = 0xf0;

int size_category(int v) noexcept {
  int m = v < 0 ? -v : v;
  int s = 0;
  while (m > 0) {
    ++s;
    m >>= 1;
  }
  return s;
}

std::uint32_t magnitude_bits(int v, int size) noexcept {
  return v >= 0 ? static_cast<std::uint32_t>(v) : static_cast<std::uint32_t>(v + (1 << size) - 1);
}

int from_magnitude_bits(std::uint32_t bits, int size) noexcept {
  if (size == 0) return 0;
  if (bits & (1u << (size - 1))) return static_cast<int>(bits);
  return static_cast<int>(bits) - (1 << size) + 1;
}

struct ImageModels {
  AdaptiveModel dc{16};
  AdaptiveModel ac{256};
};

int padded(int v) { return (v + 7) / 8 * 8; }

}  // namespace

std::vector<std::uint8_t> encode_keyframe(const Frame& frame, QualityFactor q) {
  require(frame.width() > 0 && frame.width() <= 0xffff && frame.height() > 0 && frame.height() <= 0xffff,
          "keyframe dimensions must fit in 16 bits");
  const double step = quantizer_step(q);
  const int w = frame.width();
  const int h = frame.height();
  const int pw = padded(w);
  const int ph = padded(h);

  std::vector<std::uint8_t> out;
  put_u16(out, static_cast<std::uint32_t>(w));
  put_u16(out, static_cast<std::uint32_t>(h));
  out.push_back(static_cast<std::uint8_t>(frame.planes()));
  put_u16(out, static_cast<std::uint32_t>(q));

  ImageModels models;
  ArithmeticEncoder enc;
  for (int p = 0; p < frame.planes(); ++p) {
    const auto plane = frame.plane(p);
    int prev_dc = 0;
    for (int by = 0; by < ph; by += 8) {
      for (int bx = 0; bx < pw; bx += 8) {
        Block8 block{};
        for (int y = 0; y < 8; ++y) {
          const int sy = std::min(by + y, h - 1);
          for (int x = 0; x < 8; ++x) {
            const int sx = std::min(bx + x, w - 1);
            block[y * 8 + x] = double(plane[static_cast<std::size_t>(sy) * w + sx]) - 128.0;
          }
        }
        forward_dct8(block);
        std::array<int, 64> level{};
        for (int i = 0; i < 64; ++i) level[i] = static_cast<int>(std::lround(block[kZigzag[i]] / step));

        const int diff = level[0] - prev_dc;
        prev_dc = level[0];
        const int dc_size = size_category(diff);
        enc.encode(models.dc, static_cast<std::size_t>(dc_size));
        enc.encode_bits(magnitude_bits(diff, dc_size), dc_size);

        int run = 0;
        for (int i = 1; i < 64; ++i) {
          if (level[i] == 0) {
            ++run;
            continue;
          }
          while (run > 15) {
            enc.encode(models.ac, kZeroRun16);
            run -= 16;
          }
          const int size = size_category(level[i]);
          enc.encode(models.ac, static_cast<std::size_t>((run << 4) | size));
          enc.encode_bits(magnitude_bits(level[i], size), size);
          run = 0;
        }
        if (run > 0) enc.encode(models.ac, kEndOfBlock);
      }
    }
  }
  const auto body = enc.finish();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Frame decode_keyframe(std::span<const std::uint8_t> payload) {
  if (payload.size() < kImageHeaderBytes) fail(ErrorKind::malformed_payload, "keyframe payload too short");
  const int w = static_cast<int>(get_u16(payload, 0));
  const int h = static_cast<int>(get_u16(payload, 2));
  const int planes = payload[4];
  const auto q = quality_from_int(static_cast<int>(get_u16(payload, 5)));
  if (w == 0 || h == 0 || (planes != 1 && planes != 3) || !q) {
    fail(ErrorKind::malformed_payload, "invalid keyframe header");
  }
  const double step = quantizer_step(*q);
  const int pw = padded(w);
  const int ph = padded(h);

  Frame frame(w, h, planes);
  ImageModels models;
  ArithmeticDecoder dec(payload.subspan(kImageHeaderBytes));
  for (int p = 0; p < planes; ++p) {
    auto plane = frame.plane(p);
    int prev_dc = 0;
    for (int by = 0; by < ph; by += 8) {
      for (int bx = 0; bx < pw; bx += 8) {
        std::array<int, 64> level{};
        const int dc_size = static_cast<int>(dec.decode(models.dc));
        level[0] = prev_dc + from_magnitude_bits(dec.decode_bits(dc_size), dc_size);
        prev_dc = level[0];
        int i = 1;
        while (i < 64) {
          const auto sym = dec.decode(models.ac);
          if (sym == kEndOfBlock) break;
          if (sym == kZeroRun16) {
            i += 16;
            if (i >= 64) fail(ErrorKind::malformed_payload, "zero run past the end of a block");
            continue;
          }
          const int run = static_cast<int>(sym >> 4);
          const int size = static_cast<int>(sym & 0x0f);
          if (size == 0) fail(ErrorKind::malformed_payload, "invalid AC symbol");
          i += run;
          if (i >= 64) fail(ErrorKind::malformed_payload, "coefficient index past the end of a block");
          level[i++] = from_magnitude_bits(dec.decode_bits(size), size);
        }
        Block8 block{};
        for (int k = 0; k < 64; ++k) block[kZigzag[k]] = level[k] * step;
        inverse_dct8(block);
        for (int y = 0; y < 8 && by + y < h; ++y) {
          for (int x = 0; x < 8 && bx + x < w; ++x) {
            const double v = std::floor(block[y * 8 + x] + 128.0 + 0.5);
            plane[static_cast<std::size_t>(by + y) * w + bx + x] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
          }
        }
      }
    }
  }
  dec.finish();
  return frame;
}

Frame decode_keyframe(std::span<const std::uint8_t> payload, int width, int height, int planes) {
  Frame f = decode_keyframe(payload);
  require(f.width() == width && f.height() == height && f.planes() == planes,
          "decoded keyframe geometry differs from the stream header");
  return f;
}

// ---- interpolation weights --------------------------------------------------

WeightTrack linear_schedule(std::size_t intermediate_count) {
  WeightTrack w;
  for (std::size_t t = 0; t < intermediate_count; ++t) {
    const double v = 1.0 - double(t + 1) / double(intermediate_count + 1);
    w.wi.push_back(v);
    w.wl.push_back(v);
  }
  return w;
}

namespace {

std::uint32_t quantize_weight(double w) {
  require(std::isfinite(w) && w >= 0.0 && w <= 1.0, "weights must lie in [0, 1]");
  return static_cast<std::uint32_t>(std::lround(w * 65535.0));
}

}  // namespace

std::vector<std::uint8_t> encode_weights(const WeightTrack& w) {
  require(w.wi.size() == w.wl.size(), "wi and wl tracks differ in length");
  require(w.wi.size() <= 0xffff, "weight track longer than 65535 entries");
  std::vector<std::uint8_t> out;
  out.reserve(2 + 4 * w.size());
  put_u16(out, static_cast<std::uint32_t>(w.size()));
  for (std::size_t t = 0; t < w.size(); ++t) {
    put_u16(out, quantize_weight(w.wi[t]));
    put_u16(out, quantize_weight(w.wl[t]));
  }
  return out;
}

WeightTrack decode_weights(std::span<const std::uint8_t> payload) {
  if (payload.size() < 2) fail(ErrorKind::malformed_payload, "weight payload shorter than its count field");
  const std::size_t count = get_u16(payload, 0);
  if (payload.size() != 2 + 4 * count) fail(ErrorKind::malformed_payload, "weight payload length mismatch");
  WeightTrack w;
  w.wi.reserve(count);
  w.wl.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    w.wi.push_back(get_u16(payload, 2 + 4 * t) / 65535.0);
    w.wl.push_back(get_u16(payload, 4 + 4 * t) / 65535.0);
  }
  return w;
}

}  // namespace cmvc
