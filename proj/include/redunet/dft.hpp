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

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "redunet/error.hpp"

namespace redunet {

using cplx = std::complex<double>;

/// Unitary DFT: X[p] = T^{-1/2} sum_t x[t] exp(-2 pi i p t / T).
///
/// Under this scaling a circulant matrix is diagonalized as
///   F circ(z) F^* = diag(sqrt(T) * DFT(z)),
/// i.e. its eigenvalues are the *unscaled* DFT of z. The sqrt(T) factor is
/// what the spectral operators below carry as the bin-count scale.
class UnitaryDft {
 public:
  explicit UnitaryDft(std::size_t length) : n_(length), scale_(1.0 / std::sqrt(static_cast<double>(length))) {
    require(length >= 1, ErrorKind::InvalidArgument, "DFT length must be >= 1");
    fft_.SetFlag(Eigen::FFT<double>::Unscaled);
  }

  std::size_t size() const { return n_; }

  void forward(std::span<const cplx> in, std::span<cplx> out) {
    check(in.size(), out.size());
    if (n_ == 1) {  // kissfft cannot plan a length-1 transform
      out[0] = in[0];
      return;
    }
    buf_in_.assign(in.begin(), in.end());
    fft_.fwd(buf_out_, buf_in_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = buf_out_[i] * scale_;
  }

  void inverse(std::span<const cplx> in, std::span<cplx> out) {
    check(in.size(), out.size());
    if (n_ == 1) {  // kissfft cannot plan a length-1 transform
      out[0] = in[0];
      return;
    }
    buf_in_.assign(in.begin(), in.end());
    fft_.inv(buf_out_, buf_in_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = buf_out_[i] * scale_;
  }

 private:
  void check(std::size_t a, std::size_t b) const {
    require(a == n_ && b == n_, ErrorKind::Shape, "DFT length mismatch");
  }

  std::size_t n_;
  double scale_;
  Eigen::FFT<double> fft_;
  std::vector<cplx> buf_in_, buf_out_;
};

/// Separable unitary 2-D DFT over a row-major H x W grid (F = F_H kron F_W).
class UnitaryDft2d {
 public:
  UnitaryDft2d(std::size_t h, std::size_t w) : h_(h), w_(w), rows_(w), cols_(h), line_(std::max(h, w)) {}

  std::size_t size() const { return h_ * w_; }

  void forward(std::span<const cplx> in, std::span<cplx> out) { apply(in, out, true); }
  void inverse(std::span<const cplx> in, std::span<cplx> out) { apply(in, out, false); }

 private:
  void apply(std::span<const cplx> in, std::span<cplx> out, bool fwd) {
    require(in.size() == size() && out.size() == size(), ErrorKind::Shape, "2-D DFT size mismatch");
    std::vector<cplx> tmp(size());
    std::vector<cplx> a(line_), b(line_);
    for (std::size_t r = 0; r < h_; ++r) {
      std::span<const cplx> src = in.subspan(r * w_, w_);
      std::span<cplx> dst(tmp.data() + r * w_, w_);
      fwd ? rows_.forward(src, dst) : rows_.inverse(src, dst);
    }
    for (std::size_t c = 0; c < w_; ++c) {
      for (std::size_t r = 0; r < h_; ++r) a[r] = tmp[r * w_ + c];
      std::span<const cplx> src(a.data(), h_);
      std::span<cplx> dst(b.data(), h_);
      fwd ? cols_.forward(src, dst) : cols_.inverse(src, dst);
      for (std::size_t r = 0; r < h_; ++r) out[r * w_ + c] = b[r];
    }
  }

  std::size_t h_, w_;
  UnitaryDft rows_, cols_;
  std::size_t line_;
};

inline Eigen::VectorXcd dft_1d(const Eigen::VectorXcd& x) {
  UnitaryDft dft(static_cast<std::size_t>(x.size()));
  Eigen::VectorXcd out(x.size());
  dft.forward({x.data(), static_cast<std::size_t>(x.size())}, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

inline Eigen::VectorXcd dft_1d(const Eigen::VectorXd& x) { return dft_1d(Eigen::VectorXcd(x.cast<cplx>())); }

inline Eigen::VectorXcd idft_1d(const Eigen::VectorXcd& x) {
  UnitaryDft dft(static_cast<std::size_t>(x.size()));
  Eigen::VectorXcd out(x.size());
  dft.inverse({x.data(), static_cast<std::size_t>(x.size())}, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

/// T x T matrix whose column t is z cyclically shifted down by t, so that
/// circulant(z) * x is the circular convolution z (*) x.
inline Eigen::MatrixXd circulant(const Eigen::VectorXd& z) {
  const Eigen::Index t = z.size();
  require(t >= 1, ErrorKind::InvalidArgument, "circulant of an empty vector");
  Eigen::MatrixXd c(t, t);
  for (Eigen::Index col = 0; col < t; ++col) {
    for (Eigen::Index row = 0; row < t; ++row) c(row, col) = z((row - col + t) % t);
  }
  return c;
}

/// HW x HW doubly block circulant matrix of a row-major H x W image: column
/// (p, q) (index p*W + q) is the image translated by p rows and q columns.
inline Eigen::MatrixXd circulant_2d(const Eigen::MatrixXd& image) {
  const Eigen::Index h = image.rows(), w = image.cols();
  require(h >= 1 && w >= 1, ErrorKind::InvalidArgument, "circulant of an empty image");
  Eigen::MatrixXd c(h * w, h * w);
  for (Eigen::Index p = 0; p < h; ++p) {
    for (Eigen::Index q = 0; q < w; ++q) {
      for (Eigen::Index r = 0; r < h; ++r) {
        for (Eigen::Index s = 0; s < w; ++s) {
          c(r * w + s, p * w + q) = image((r - p + h) % h, (s - q + w) % w);
        }
      }
    }
  }
  return c;
}

}  // namespace redunet
