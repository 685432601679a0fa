// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "spk/tensor.hpp"

namespace spk {

// Binary layout (all integers little-endian):
//   "SPKT" | version u8 = 1 | dtype u8 | rank u8 | reserved u8 = 0 | rank x u32 dims | payload
// dtype 0: float32 LE, dtype 1: one byte per element, each 0 or 1.
enum class TensorDType : std::uint8_t { float32 = 0, binary = 1 };

using AnyTensor = std::variant<DenseTensor, SpikeTensor>;

std::vector<std::uint8_t> encode_tensor(const DenseTensor& t);
std::vector<std::uint8_t> encode_tensor(const SpikeTensor& t);
AnyTensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor_file(const std::filesystem::path& path, const DenseTensor& t);
void write_tensor_file(const std::filesystem::path& path, const SpikeTensor& t);
AnyTensor read_tensor_file(const std::filesystem::path& path);

// Typed readers; FormatError when the stored dtype differs.
DenseTensor read_dense_file(const std::filesystem::path& path);
SpikeTensor read_spike_file(const std::filesystem::path& path);

}  // namespace spk
