#ifndef LATC_WIRE_HPP
#define LATC_WIRE_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "latc/common.hpp"

namespace latc {

// Little-endian byte buffer helpers shared by the file formats.
class ByteWriter {
 public:
  void u8(uint8_t v) { bytes_.push_back(v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(uint8_t(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void magic(const char m[4]) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(uint8_t(m[i]));
  }
  void raw(const uint8_t* p, size_t n) { bytes_.insert(bytes_.end(), p, p + n); }

  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
  explicit ByteReader(const std::vector<uint8_t>& v)
      : data_(v.data()), size_(v.size()) {}

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void expect_magic(const char m[4], const std::string& what) {
    need(4, "truncated " + what + " file");
    if (std::memcmp(data_ + pos_, m, 4) != 0)
      throw DataError("bad magic in " + what + " file");
    pos_ += 4;
  }
  const uint8_t* cursor() const { return data_ + pos_; }
  size_t remaining() const { return size_ - pos_; }
  void skip(size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(size_t n, const std::string& msg = "truncated file") {
    if (size_ - pos_ < n) throw DataError(msg);
  }
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace latc

#endif  // LATC_WIRE_HPP
