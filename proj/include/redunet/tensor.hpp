// Copyright 2026 The ReduNet-CPP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "redunet/error.hpp"

namespace redunet {

enum class Dtype : std::uint8_t { Real64 = 1, UInt32 = 2 };

/// Dense row-major tensor of 1 to 4 dimensions. Values are always held as
/// doubles in memory; the dtype only selects the on-disk payload encoding
/// (uint32 is used for label vectors).
struct Tensor {
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
  Dtype dtype = Dtype::Real64;

  Tensor() = default;
  Tensor(std::vector<std::uint64_t> s, Dtype d = Dtype::Real64)
      : shape(std::move(s)), data(element_count(shape), 0.0), dtype(d) {
    validate();
  }
  Tensor(std::vector<std::uint64_t> s, std::vector<double> values, Dtype d = Dtype::Real64)
      : shape(std::move(s)), data(std::move(values)), dtype(d) {
    validate();
  }

  static std::uint64_t element_count(const std::vector<std::uint64_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::uint64_t{1}, std::multiplies<>());
  }

  std::size_t ndim() const { return shape.size(); }
  std::size_t size() const { return data.size(); }
  std::size_t extent(std::size_t axis) const { return static_cast<std::size_t>(shape.at(axis)); }

  void validate() const {
    require(!shape.empty() && shape.size() <= 4, ErrorKind::Shape,
            "tensor must have 1-4 dimensions, got " + std::to_string(shape.size()));
    require(element_count(shape) == data.size(), ErrorKind::Shape,
            "shape product " + std::to_string(element_count(shape)) + " != data length " +
                std::to_string(data.size()));
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

namespace detail {

template <typename T>
T byteswap_value(T v) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(T));
  std::reverse(bytes.begin(), bytes.end());
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return byteswap_value(v);
}

template <typename T>
T to_big(T v) {
  if constexpr (std::endian::native == std::endian::big) return v;
  return byteswap_value(v);
}

/// Little-endian binary sink with path context in errors.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    require(out_.good(), ErrorKind::Io, "cannot open for writing: " + path_.string());
  }

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    require(out_.good(), ErrorKind::Io, "write failed: " + path_.string());
  }

  template <typename T>
  void value(T v) {
    v = to_little(v);
    bytes(&v, sizeof(T));
  }

  void reals(const double* p, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
      bytes(p, n * sizeof(double));
    } else {
      for (std::size_t i = 0; i < n; ++i) value(p[i]);
    }
  }

  void close() {
    out_.close();
    require(!out_.fail(), ErrorKind::Io, "close failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Reads a whole file into memory and hands out little-endian values.
class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    require(in.good(), ErrorKind::Io, "cannot open for reading: " + path_.string());
    const auto n = static_cast<std::size_t>(in.tellg());
    buf_.resize(n);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(buf_.data()), static_cast<std::streamsize>(n));
    require(in.good() || n == 0, ErrorKind::Io, "read failed: " + path_.string());
  }

  std::size_t remaining() const { return buf_.size() - pos_; }
  const std::filesystem::path& path() const { return path_; }

  void bytes(void* p, std::size_t n) {
    require(n <= remaining(), ErrorKind::Truncated,
            path_.string() + ": need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_) +
                ", " + std::to_string(remaining()) + " left");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }

  template <typename T>
  T value() {
    T v;
    bytes(&v, sizeof(T));
    return to_little(v);
  }

  template <typename T>
  T big_value() {
    T v;
    bytes(&v, sizeof(T));
    return to_big(v);
  }

  void reals(double* p, std::size_t n) {
    bytes(p, n * sizeof(double));
    if constexpr (std::endian::native != std::endian::little) {
      for (std::size_t i = 0; i < n; ++i) p[i] = byteswap_value(p[i]);
    }
  }

  void expect_magic(const char (&magic)[5]) {
    char got[4];
    require(remaining() >= 4, ErrorKind::Truncated, path_.string() + ": file shorter than magic");
    bytes(got, 4);
    require(std::memcmp(got, magic, 4) == 0, ErrorKind::BadMagic,
            path_.string() + ": expected magic " + std::string(magic, 4));
  }

  void expect_end() const {
    require(remaining() == 0, ErrorKind::Format,
            path_.string() + ": " + std::to_string(remaining()) + " trailing bytes");
  }

 private:
  std::filesystem::path path_;
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// RTF1 layout: "RTF1", u8 dtype, u8 ndim, ndim x u64 extents, payload.
inline void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  t.validate();
  detail::BinaryWriter w(path);
  w.bytes("RTF1", 4);
  w.value(static_cast<std::uint8_t>(t.dtype));
  w.value(static_cast<std::uint8_t>(t.ndim()));
  for (auto e : t.shape) w.value(e);
  switch (t.dtype) {
    case Dtype::Real64:
      w.reals(t.data.data(), t.data.size());
      break;
    case Dtype::UInt32:
      for (double v : t.data) {
        require(v >= 0 && v <= 4294967295.0 && v == static_cast<double>(static_cast<std::uint32_t>(v)),
                ErrorKind::InvalidArgument, "value not representable as uint32: " + std::to_string(v));
        w.value(static_cast<std::uint32_t>(v));
      }
      break;
    default:
      fail(ErrorKind::UnknownDtype, "cannot write dtype " + std::to_string(static_cast<int>(t.dtype)));
  }
  w.close();
}

inline Tensor read_tensor(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("RTF1");
  const auto dtype_code = r.value<std::uint8_t>();
  require(dtype_code == 1 || dtype_code == 2, ErrorKind::UnknownDtype,
          path.string() + ": dtype code " + std::to_string(dtype_code));
  const auto ndim = r.value<std::uint8_t>();
  require(ndim >= 1 && ndim <= 4, ErrorKind::Format, path.string() + ": ndim " + std::to_string(ndim));
  std::vector<std::uint64_t> shape(ndim);
  for (auto& e : shape) e = r.value<std::uint64_t>();
  const auto count = Tensor::element_count(shape);
  const std::size_t width = dtype_code == 1 ? 8 : 4;
  require(count <= r.remaining() / width, ErrorKind::Truncated,
          path.string() + ": payload holds " + std::to_string(r.remaining()) + " bytes, header needs " +
              std::to_string(count * width));
  std::vector<double> data(count);
  if (dtype_code == 1) {
    r.reals(data.data(), count);
  } else {
    for (auto& v : data) v = r.value<std::uint32_t>();
  }
  r.expect_end();
  return Tensor(std::move(shape), std::move(data), static_cast<Dtype>(dtype_code));
}

/// Loads an IDX file (big-endian header, unsigned-byte payload). Images
/// (magic 0x00000803) come back as m x H x W reals scaled by 1/255; labels
/// (magic 0x00000801) as an m-length uint32 tensor.
inline Tensor read_idx(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  require(r.remaining() >= 4, ErrorKind::Truncated, path.string() + ": missing IDX magic");
  const auto magic = r.big_value<std::uint32_t>();
  const auto type_code = (magic >> 8) & 0xFFu;
  const auto ndim = magic & 0xFFu;
  require((magic >> 16) == 0, ErrorKind::BadMagic, path.string() + ": IDX magic must start with two zero bytes");
  require(type_code == 0x08, ErrorKind::UnknownDtype,
          path.string() + ": unsupported IDX type code " + std::to_string(type_code));
  require(ndim == 1 || ndim == 3, ErrorKind::Shape,
          path.string() + ": expected 1 (labels) or 3 (images) dimensions, got " + std::to_string(ndim));
  std::vector<std::uint64_t> shape(ndim);
  for (auto& e : shape) e = r.big_value<std::uint32_t>();
  const auto count = Tensor::element_count(shape);
  require(count == r.remaining(), count > r.remaining() ? ErrorKind::Truncated : ErrorKind::Shape,
          path.string() + ": header declares " + std::to_string(count) + " bytes, file holds " +
              std::to_string(r.remaining()));
  std::vector<unsigned char> raw(count);
  r.bytes(raw.data(), count);
  std::vector<double> data(count);
  if (ndim == 1) {
    for (std::size_t i = 0; i < count; ++i) data[i] = raw[i];
    return Tensor(std::move(shape), std::move(data), Dtype::UInt32);
  }
  for (std::size_t i = 0; i < count; ++i) data[i] = raw[i] / 255.0;
  return Tensor(std::move(shape), std::move(data), Dtype::Real64);
}

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 2-D tensor to matrix (rows = first extent).
inline Eigen::MatrixXd to_matrix(const Tensor& t) {
  require(t.ndim() == 2, ErrorKind::Shape, "expected a 2-D tensor, got " + std::to_string(t.ndim()) + "-D");
  return Eigen::Map<const RowMajorMatrix>(t.data.data(), static_cast<Eigen::Index>(t.extent(0)),
                                          static_cast<Eigen::Index>(t.extent(1)));
}

inline Tensor from_matrix(const Eigen::MatrixXd& m) {
  Tensor t({static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())});
  Eigen::Map<RowMajorMatrix>(t.data.data(), m.rows(), m.cols()) = m;
  return t;
}

inline std::vector<int> to_labels(const Tensor& t) {
  require(t.ndim() == 1, ErrorKind::Shape, "label tensor must be 1-D");
  std::vector<int> labels(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(t.data[i] >= 0 && t.data[i] == static_cast<double>(static_cast<int>(t.data[i])), ErrorKind::Format,
            "label " + std::to_string(t.data[i]) + " is not a non-negative integer");
    labels[i] = static_cast<int>(t.data[i]);
  }
  return labels;
}

inline Tensor from_labels(const std::vector<int>& labels) {
  Tensor t({static_cast<std::uint64_t>(labels.size())}, Dtype::UInt32);
  for (std::size_t i = 0; i < labels.size(); ++i) t.data[i] = labels[i];
  return t;
}

}  // namespace redunet
