#ifndef LATC_RANGE_CODER_HPP
#define LATC_RANGE_CODER_HPP

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "latc/common.hpp"

namespace latc {

// Carryless byte-oriented range coder. Instead of propagating carries into
// emitted bytes, renormalization truncates the range at the next 2^16
// boundary whenever the top byte straddles one, so bytes never change after
// they leave the coder. Worst-case truncation loss is a fraction of a bit
// per renorm. Frequencies are 16-bit fixed point (total 1 << 16).
namespace rc {
constexpr uint32_t kTop = 1u << 24;
constexpr uint32_t kBot = 1u << 16;
constexpr uint32_t kProbScale = 1u << kCoderPrecision;
}  // namespace rc

class RangeEncoder {
 public:
  // p_one is P(bit == 1) in 1/65536 units, within [1, 65535].
  void encode_bit(int bit, uint32_t p_one) {
    if (p_one < 1 || p_one >= rc::kProbScale) {
      throw UsageError("bit probability outside fixed-point range");
    }
    const uint32_t r = range_ >> kCoderPrecision;
    const uint32_t split = r * (rc::kProbScale - p_one);
    if (bit) {
      low_ += split;
      range_ = r * p_one;
    } else {
      range_ = split;
    }
    renorm();
  }

  // Raw bits, most significant first, at exactly half the range each.
  void encode_bypass(uint32_t bits, int count) {
    if (count < 0 || count > 32) throw UsageError("bypass count outside [0, 32]");
    for (int i = count - 1; i >= 0; --i) {
      const uint32_t half = range_ >> 1;
      if ((bits >> i) & 1u) {
        low_ += half;
        range_ -= half;
      } else {
        range_ = half;
      }
      renorm();
    }
  }

  // One symbol of a quantized CDF: occupies [cum, cum + freq) of 2^16.
  void encode_symbol(uint32_t cum, uint32_t freq) {
    if (freq == 0 || cum + freq > rc::kProbScale) {
      throw UsageError("symbol interval outside fixed-point total");
    }
    const uint32_t r = range_ >> kCoderPrecision;
    low_ += r * cum;
    range_ = r * freq;
    renorm();
  }

  std::vector<uint8_t> finish() {
    for (int i = 0; i < 4; ++i) {
      bytes_.push_back(uint8_t(low_ >> 24));
      low_ <<= 8;
    }
    return std::move(bytes_);
  }

  size_t size() const { return bytes_.size(); }

 private:
  void renorm() {
    while ((low_ ^ (low_ + range_)) < rc::kTop ||
           (range_ < rc::kBot && ((range_ = (0u - low_) & (rc::kBot - 1)), true))) {
      bytes_.push_back(uint8_t(low_ >> 24));
      low_ <<= 8;
      range_ <<= 8;
    }
  }

  uint32_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  std::vector<uint8_t> bytes_;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t size) : data_(data), size_(size) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
  }

  int decode_bit(uint32_t p_one) {
    if (p_one < 1 || p_one >= rc::kProbScale) {
      throw UsageError("bit probability outside fixed-point range");
    }
    const uint32_t r = range_ >> kCoderPrecision;
    const uint32_t split = r * (rc::kProbScale - p_one);
    int bit;
    if (code_ - low_ < split) {
      bit = 0;
      range_ = split;
    } else {
      bit = 1;
      low_ += split;
      range_ = r * p_one;
    }
    renorm();
    return bit;
  }

  uint32_t decode_bypass(int count) {
    if (count < 0 || count > 32) throw UsageError("bypass count outside [0, 32]");
    uint32_t bits = 0;
    for (int i = 0; i < count; ++i) {
      const uint32_t half = range_ >> 1;
      uint32_t bit;
      if (code_ - low_ < half) {
        bit = 0;
        range_ = half;
      } else {
        bit = 1;
        low_ += half;
        range_ -= half;
      }
      renorm();
      bits = (bits << 1) | bit;
    }
    return bits;
  }

  // Cumulative position of the pending symbol, in [0, 2^16). The caller
  // looks it up in its CDF and then calls decode_advance with the match.
  uint32_t decode_cum() const {
    const uint32_t r = range_ >> kCoderPrecision;
    const uint32_t v = (code_ - low_) / r;
    return v < rc::kProbScale ? v : rc::kProbScale - 1;
  }

  void decode_advance(uint32_t cum, uint32_t freq) {
    if (freq == 0 || cum + freq > rc::kProbScale) {
      throw UsageError("symbol interval outside fixed-point total");
    }
    const uint32_t r = range_ >> kCoderPrecision;
    low_ += r * cum;
    range_ = r * freq;
    renorm();
  }

  size_t consumed() const { return pos_; }

 private:
  uint8_t next_byte() {
    if (pos_ >= size_) throw DataError("coded stream truncated");
    return data_[pos_++];
  }

  void renorm() {
    while ((low_ ^ (low_ + range_)) < rc::kTop ||
           (range_ < rc::kBot && ((range_ = (0u - low_) & (rc::kBot - 1)), true))) {
      code_ = (code_ << 8) | next_byte();
      low_ <<= 8;
      range_ <<= 8;
    }
  }

  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
  uint32_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

}  // namespace latc

#endif  // LATC_RANGE_CODER_HPP
