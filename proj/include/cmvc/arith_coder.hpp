#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cmvc {

/// Adaptive order-0 frequency model. Every count starts at 1, grows by one per
/// coded symbol, and the table is halved once the total exceeds 2^16.
class AdaptiveModel {
 public:
  static constexpr std::uint32_t kMaxTotal = 1u << 16;

  explicit AdaptiveModel(std::size_t alphabet_size);

  std::size_t alphabet_size() const noexcept { return freq_.size(); }
  std::uint32_t total() const noexcept { return total_; }
  std::uint32_t cum_low(std::size_t symbol) const;
  std::uint32_t freq(std::size_t symbol) const { return freq_[symbol]; }
  /// Symbol whose cumulative range contains `target` (< total()).
  std::size_t find(std::uint32_t target) const;
  void update(std::size_t symbol);

 private:
  std::vector<std::uint32_t> freq_;
  std::uint32_t total_ = 0;
};

/// 32-bit integer arithmetic coder with carry-free bit-plus-follow renormalization.
class ArithmeticEncoder {
 public:
  void encode(AdaptiveModel& model, std::size_t symbol);
  /// Codes `count` low bits of `value` at probability 1/2 each, MSB first.
  void encode_bits(std::uint32_t value, int count);
  /// Flushes the final interval; the encoder must not be used afterwards.
  std::vector<std::uint8_t> finish();

 private:
  void encode_range(std::uint32_t cum_low, std::uint32_t cum_high, std::uint32_t total);
  void emit(int bit);

  std::uint64_t low_ = 0;
  std::uint64_t high_ = 0xffffffffULL;
  std::uint64_t pending_ = 0;
  std::vector<std::uint8_t> bytes_;
  std::uint8_t current_ = 0;
  int filled_ = 0;
};

/// Decoder counterpart; throws malformed_payload on reads past the end or
/// inconsistent state.
class ArithmeticDecoder {
 public:
  explicit ArithmeticDecoder(std::span<const std::uint8_t> bytes);

  std::size_t decode(AdaptiveModel& model);
  std::uint32_t decode_bits(int count);
  /// Verifies the payload was consumed exactly (no trailing bytes, zero padding).
  void finish() const;

 private:
  std::uint32_t decode_target(std::uint32_t total);
  void narrow(std::uint32_t cum_low, std::uint32_t cum_high, std::uint32_t total);
  int next_bit();

  std::span<const std::uint8_t> bytes_;
  std::size_t bit_pos_ = 0;
  std::uint64_t low_ = 0;
  std::uint64_t high_ = 0xffffffffULL;
  std::uint64_t value_ = 0;
};

}  // namespace cmvc
