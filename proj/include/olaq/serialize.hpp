// SPDX-License-Identifier: Apache-2.0
//
// Binary tensor records, little-endian:
//
//   "OLAQ" | version u32 (=1) | dtype u8 | ndim u8 | dims u64 x ndim
//   dtype 0 (float32):     payload f32 x n
//   dtype 1 (quantized):   bit_width u8 | scale_exp i32 | payload i16 x n
//
// Containers group several records with a typed header:
//
//   "OLQC" | version u32 (=1) | kind u8 | body
//
// Container bodies are defined next to the types they hold
// (outlier.hpp for decompositions, ilinear.hpp for layer checkpoints).
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "olaq/bfp.hpp"
#include "olaq/tensor.hpp"

namespace olaq {

inline constexpr char kTensorMagic[4] = {'O', 'L', 'A', 'Q'};
inline constexpr char kContainerMagic[4] = {'O', 'L', 'Q', 'C'};
inline constexpr std::uint32_t kFormatVersion = 1;

enum class TensorDType : std::uint8_t { Float32 = 0, Quantized = 1 };

enum class ContainerKind : std::uint8_t {
  Approach1 = 1,
  Approach2 = 2,
  LayerCheckpoint = 3,
};

using AnyTensor = std::variant<FloatTensor, QuantizedBlock>;

namespace io {

void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_i32(std::ostream& os, std::int32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f32(std::ostream& os, float v);

std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
std::int32_t read_i32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
float read_f32(std::istream& is);

}  // namespace io

void write_tensor(std::ostream& os, const FloatTensor& t);
void write_tensor(std::ostream& os, const QuantizedBlock& qb);
AnyTensor read_tensor(std::istream& is);

FloatTensor read_float_tensor(std::istream& is);
QuantizedBlock read_quantized_block(std::istream& is);

void write_container_header(std::ostream& os, ContainerKind kind);
ContainerKind read_container_header(std::istream& is);

void save_tensor(const std::filesystem::path& path, const AnyTensor& t);
AnyTensor load_tensor(const std::filesystem::path& path);

}  // namespace olaq
