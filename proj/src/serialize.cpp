// SPDX-License-Identifier: Apache-2.0
#include "olaq/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "olaq/error.hpp"

namespace olaq {

namespace io {

namespace {

template <typename U>
void write_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> buf;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  os.write(buf.data(), buf.size());
}

template <typename U>
U read_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> buf;
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw FormatError("unexpected end of tensor stream");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(buf[i]) << (8 * i);
  }
  return v;
}

}  // namespace

void write_u8(std::ostream& os, std::uint8_t v) { write_le(os, v); }
void write_u32(std::ostream& os, std::uint32_t v) { write_le(os, v); }
void write_i32(std::ostream& os, std::int32_t v) {
  write_le(os, static_cast<std::uint32_t>(v));
}
void write_u64(std::ostream& os, std::uint64_t v) { write_le(os, v); }
void write_f32(std::ostream& os, float v) {
  write_le(os, std::bit_cast<std::uint32_t>(v));
}

std::uint8_t read_u8(std::istream& is) { return read_le<std::uint8_t>(is); }
std::uint32_t read_u32(std::istream& is) { return read_le<std::uint32_t>(is); }
std::int32_t read_i32(std::istream& is) {
  return static_cast<std::int32_t>(read_le<std::uint32_t>(is));
}
std::uint64_t read_u64(std::istream& is) { return read_le<std::uint64_t>(is); }
float read_f32(std::istream& is) {
  return std::bit_cast<float>(read_le<std::uint32_t>(is));
}

}  // namespace io

namespace {

void write_header(std::ostream& os, TensorDType dtype, const Shape& shape) {
  if (shape.size() > 255) throw ShapeError("too many dimensions to serialize");
  os.write(kTensorMagic, 4);
  io::write_u32(os, kFormatVersion);
  io::write_u8(os, static_cast<std::uint8_t>(dtype));
  io::write_u8(os, static_cast<std::uint8_t>(shape.size()));
  for (std::size_t d : shape) io::write_u64(os, d);
}

void read_magic(std::istream& is, const char (&magic)[4]) {
  char buf[4];
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw FormatError("bad magic, expected \"" + std::string(magic, 4) + "\"");
  }
  const std::uint32_t version = io::read_u32(is);
  if (version != kFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version));
  }
}

}  // namespace

void write_tensor(std::ostream& os, const FloatTensor& t) {
  write_header(os, TensorDType::Float32, t.shape);
  for (float v : t.values) io::write_f32(os, v);
}

void write_tensor(std::ostream& os, const QuantizedBlock& qb) {
  write_header(os, TensorDType::Quantized, qb.shape);
  io::write_u8(os, static_cast<std::uint8_t>(qb.bit_width));
  io::write_i32(os, qb.scale_exp);
  for (std::int16_t v : qb.q) {
    const auto u = static_cast<std::uint16_t>(v);
    io::write_u8(os, static_cast<std::uint8_t>(u & 0xFF));
    io::write_u8(os, static_cast<std::uint8_t>(u >> 8));
  }
}

AnyTensor read_tensor(std::istream& is) {
  read_magic(is, kTensorMagic);
  const auto dtype = io::read_u8(is);
  const auto ndim = io::read_u8(is);
  Shape shape(ndim);
  for (auto& d : shape) d = io::read_u64(is);
  const std::size_t n = element_count(shape);

  if (dtype == static_cast<std::uint8_t>(TensorDType::Float32)) {
    std::vector<float> values(n);
    for (auto& v : values) v = io::read_f32(is);
    return FloatTensor(std::move(shape), std::move(values));
  }
  if (dtype == static_cast<std::uint8_t>(TensorDType::Quantized)) {
    QuantizedBlock qb;
    qb.shape = std::move(shape);
    qb.bit_width = io::read_u8(is);
    qb.scale_exp = io::read_i32(is);
    qb.q.resize(n);
    for (auto& v : qb.q) {
      const std::uint16_t lo = io::read_u8(is);
      const std::uint16_t hi = io::read_u8(is);
      v = static_cast<std::int16_t>(lo | (hi << 8));
    }
    try {
      validate(qb);
    } catch (const Error& e) {
      throw FormatError(std::string("invalid quantized block: ") + e.what());
    }
    return qb;
  }
  throw FormatError("unknown tensor dtype " + std::to_string(dtype));
}

FloatTensor read_float_tensor(std::istream& is) {
  auto t = read_tensor(is);
  if (auto* f = std::get_if<FloatTensor>(&t)) return std::move(*f);
  throw FormatError("expected a float32 tensor record");
}

QuantizedBlock read_quantized_block(std::istream& is) {
  auto t = read_tensor(is);
  if (auto* q = std::get_if<QuantizedBlock>(&t)) return std::move(*q);
  throw FormatError("expected a quantized block record");
}

void write_container_header(std::ostream& os, ContainerKind kind) {
  os.write(kContainerMagic, 4);
  io::write_u32(os, kFormatVersion);
  io::write_u8(os, static_cast<std::uint8_t>(kind));
}

ContainerKind read_container_header(std::istream& is) {
  read_magic(is, kContainerMagic);
  const auto kind = io::read_u8(is);
  if (kind < 1 || kind > 3) {
    throw FormatError("unknown container kind " + std::to_string(kind));
  }
  return static_cast<ContainerKind>(kind);
}

void save_tensor(const std::filesystem::path& path, const AnyTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  std::visit([&](const auto& v) { write_tensor(os, v); }, t);
  if (!os) throw IoError("failed writing " + path.string());
}

AnyTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_tensor(is);
}

}  // namespace olaq
