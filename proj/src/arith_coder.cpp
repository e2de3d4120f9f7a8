#include "cmvc/arith_coder.hpp"

#include "cmvc/error.hpp"

namespace cmvc {

namespace {

constexpr std::uint64_t kTop = 0xffffffffULL;
constexpr std::uint64_t kHalf = 0x80000000ULL;
constexpr std::uint64_t kQuarter = 0x40000000ULL;
constexpr std::uint64_t kThreeQuarters = 0xc0000000ULL;

}  // namespace

AdaptiveModel::AdaptiveModel(std::size_t alphabet_size) : freq_(alphabet_size, 1) {
  require(alphabet_size >= 1 && alphabet_size <= kMaxTotal / 2, "alphabet size out of range");
  total_ = static_cast<std::uint32_t>(alphabet_size);
}

std::uint32_t AdaptiveModel::cum_low(std::size_t symbol) const {
  std::uint32_t c = 0;
  for (std::size_t i = 0; i < symbol; ++i) c += freq_[i];
  return c;
}

std::size_t AdaptiveModel::find(std::uint32_t target) const {
  std::uint32_t c = 0;
  for (std::size_t i = 0; i < freq_.size(); ++i) {
    c += freq_[i];
    if (target < c) return i;
  }
  fail(ErrorKind::malformed_payload, "arithmetic decoder target outside model range");
}

void AdaptiveModel::update(std::size_t symbol) {
  ++freq_[symbol];
  ++total_;
  if (total_ > kMaxTotal) {
    total_ = 0;
    for (auto& f : freq_) {
      f = (f + 1) / 2;
      total_ += f;
    }
  }
}

void ArithmeticEncoder::encode(AdaptiveModel& model, std::size_t symbol) {
  require(symbol < model.alphabet_size(), "symbol outside alphabet");
  const std::uint32_t lo = model.cum_low(symbol);
  encode_range(lo, lo + model.freq(symbol), model.total());
  model.update(symbol);
}

void ArithmeticEncoder::encode_bits(std::uint32_t value, int count) {
  for (int i = count - 1; i >= 0; --i) {
    const std::uint32_t bit = (value >> i) & 1u;
    encode_range(bit, bit + 1, 2);
  }
}

void ArithmeticEncoder::encode_range(std::uint32_t cum_low, std::uint32_t cum_high, std::uint32_t total) {
  const std::uint64_t range = high_ - low_ + 1;
  high_ = low_ + range * cum_high / total - 1;
  low_ = low_ + range * cum_low / total;
  for (;;) {
    if (high_ < kHalf) {
      emit(0);
    } else if (low_ >= kHalf) {
      emit(1);
      low_ -= kHalf;
      high_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      ++pending_;
      low_ -= kQuarter;
      high_ -= kQuarter;
    } else {
      break;
    }
    low_ = (low_ << 1) & kTop;
    high_ = ((high_ << 1) | 1) & kTop;
  }
}

void ArithmeticEncoder::emit(int bit) {
  auto put = [this](int b) {
    current_ = static_cast<std::uint8_t>((current_ << 1) | b);
    if (++filled_ == 8) {
      bytes_.push_back(current_);
      current_ = 0;
      filled_ = 0;
    }
  };
  put(bit);
  for (; pending_ > 0; --pending_) put(bit ^ 1);
}

std::vector<std::uint8_t> ArithmeticEncoder::finish() {
  // Emit all 32 bits of low so the decoder never reads past the payload.
  for (int i = 31; i >= 0; --i) emit(static_cast<int>((low_ >> i) & 1));
  if (filled_ > 0) {
    bytes_.push_back(static_cast<std::uint8_t>(current_ << (8 - filled_)));
    current_ = 0;
    filled_ = 0;
  }
  return std::move(bytes_);
}

ArithmeticDecoder::ArithmeticDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 32; ++i) value_ = (value_ << 1) | static_cast<std::uint64_t>(next_bit());
}

int ArithmeticDecoder::next_bit() {
  const std::size_t byte = bit_pos_ / 8;
  if (byte >= bytes_.size()) fail(ErrorKind::malformed_payload, "arithmetic-coded body is truncated");
  const int bit = (bytes_[byte] >> (7 - bit_pos_ % 8)) & 1;
  ++bit_pos_;
  return bit;
}

std::uint32_t ArithmeticDecoder::decode_target(std::uint32_t total) {
  if (value_ < low_ || value_ > high_) fail(ErrorKind::malformed_payload, "arithmetic decoder lost sync");
  const std::uint64_t range = high_ - low_ + 1;
  return static_cast<std::uint32_t>(((value_ - low_ + 1) * total - 1) / range);
}

void ArithmeticDecoder::narrow(std::uint32_t cum_low, std::uint32_t cum_high, std::uint32_t total) {
  const std::uint64_t range = high_ - low_ + 1;
  high_ = low_ + range * cum_high / total - 1;
  low_ = low_ + range * cum_low / total;
  for (;;) {
    if (high_ < kHalf) {
      // nothing to subtract
    } else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      value_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      low_ -= kQuarter;
      high_ -= kQuarter;
      value_ -= kQuarter;
    } else {
      break;
    }
    low_ = (low_ << 1) & kTop;
    high_ = ((high_ << 1) | 1) & kTop;
    value_ = ((value_ << 1) | static_cast<std::uint64_t>(next_bit())) & kTop;
  }
}

std::size_t ArithmeticDecoder::decode(AdaptiveModel& model) {
  const std::uint32_t target = decode_target(model.total());
  if (target >= model.total()) fail(ErrorKind::malformed_payload, "arithmetic decoder target out of range");
  const std::size_t symbol = model.find(target);
  const std::uint32_t lo = model.cum_low(symbol);
  narrow(lo, lo + model.freq(symbol), model.total());
  model.update(symbol);
  return symbol;
}

std::uint32_t ArithmeticDecoder::decode_bits(int count) {
  std::uint32_t v = 0;
  for (int i = 0; i < count; ++i) {
    const std::uint32_t bit = decode_target(2) >= 1 ? 1u : 0u;
    narrow(bit, bit + 1, 2);
    v = (v << 1) | bit;
  }
  return v;
}

void ArithmeticDecoder::finish() const {
  const std::size_t used = (bit_pos_ + 7) / 8;
  if (used != bytes_.size()) fail(ErrorKind::malformed_payload, "trailing bytes after arithmetic-coded body");
  if (bit_pos_ % 8 != 0) {
    const std::uint8_t mask = static_cast<std::uint8_t>(0xffu >> (bit_pos_ % 8));
    if ((bytes_.back() & mask) != 0) fail(ErrorKind::malformed_payload, "non-zero padding bits");
  }
}

}  // namespace cmvc
