#include "latc/tensor_io.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "latc/wire.hpp"

namespace latc {

namespace {
constexpr char kMagic[4] = {'L', 'T', 'N', 'S'};
constexpr uint8_t kVersion = 0x01;
// Caps the element count so dims cannot overflow size arithmetic.
constexpr uint64_t kMaxElements = uint64_t(1) << 31;
}  // namespace

std::vector<uint8_t> serialize_tensor(const LatentTensor& t) {
  check_tensor(t);
  for (float v : t.values)
    if (!std::isfinite(v)) throw DataError("tensor contains non-finite value");
  ByteWriter w;
  w.magic(kMagic);
  w.u8(kVersion);
  w.u32(t.shape.channels);
  w.u32(t.shape.height);
  w.u32(t.shape.width);
  for (float v : t.values) w.f32(v);
  return w.take();
}

LatentTensor parse_tensor(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic(kMagic, "tensor");
  const uint8_t version = r.u8();
  if (version != kVersion) throw DataError("unsupported tensor file version");
  Shape shape{r.u32(), r.u32(), r.u32()};
  const uint64_t n =
      uint64_t(shape.channels) * shape.height * shape.width;
  if (shape.channels == 0 || shape.height == 0 || shape.width == 0 ||
      n > kMaxElements)
    throw DataError("tensor dim overflow");
  if (r.remaining() != n * 4) throw DataError("truncated tensor payload");
  LatentTensor t(shape);
  for (size_t i = 0; i < t.size(); ++i) t.values[i] = r.f32();
  return t;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "rb"),
                                          std::fclose);
  if (!f) throw DataError("cannot open file: " + path);
  std::fseek(f.get(), 0, SEEK_END);
  const long size = std::ftell(f.get());
  if (size < 0) throw DataError("cannot stat file: " + path);
  std::fseek(f.get(), 0, SEEK_SET);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  if (size > 0 && std::fread(bytes.data(), 1, bytes.size(), f.get()) !=
                      bytes.size())
    throw DataError("short read: " + path);
  return bytes;
}

void write_file_bytes(const std::string& path,
                      const std::vector<uint8_t>& bytes) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "wb"),
                                          std::fclose);
  if (!f) throw DataError("cannot open file for writing: " + path);
  if (!bytes.empty() &&
      std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
    throw DataError("short write: " + path);
}

void write_tensor(const LatentTensor& t, const std::string& path) {
  write_file_bytes(path, serialize_tensor(t));
}

LatentTensor read_tensor(const std::string& path) {
  return parse_tensor(read_file_bytes(path));
}

}  // namespace latc
