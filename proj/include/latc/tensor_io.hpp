#ifndef LATC_TENSOR_IO_HPP
#define LATC_TENSOR_IO_HPP

#include <string>
#include <vector>

#include "latc/tensor.hpp"

namespace latc {

// Latent tensor file ("LTNS"): magic | version 0x01 | 3 x u32 LE dims |
// payload of f32 LE values. Round trip is bit-exact.

std::vector<uint8_t> serialize_tensor(const LatentTensor& t);
LatentTensor parse_tensor(const std::vector<uint8_t>& bytes);

void write_tensor(const LatentTensor& t, const std::string& path);
LatentTensor read_tensor(const std::string& path);

}  // namespace latc

#endif  // LATC_TENSOR_IO_HPP
