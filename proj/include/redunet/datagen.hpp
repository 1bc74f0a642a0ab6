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
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "redunet/error.hpp"
#include "redunet/random.hpp"
#include "redunet/rate.hpp"
#include "redunet/tensor.hpp"

namespace redunet {

struct LabeledFeatures {
  FeatureMatrix features;  // n x m
  std::vector<int> labels;
  int classes = 0;

  Membership membership() const { return Membership::from_labels(labels, classes); }
};

struct GaussianMixtureSpec {
  int n = 3;
  int k = 3;
  int m_per_class = 500;
  double sigma = 0.1;
  Eigen::MatrixXd means;  // n x k unit columns; drawn from the seed when empty
  std::uint64_t seed = 0;
};

struct SubspaceSpec {
  int n = 128;
  int k = 10;
  std::vector<int> d_j;  // one entry per class
  int m_per_class = 100;
  bool orthogonal = true;
  std::uint64_t seed = 0;
};

inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

inline Eigen::MatrixXd gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) a.col(c) = gaussian_vector(rng, rows);
  return a;
}

/// Orthonormal basis of the column space of a Gaussian rows x cols matrix.
inline Eigen::MatrixXd random_orthonormal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, rows, cols));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

/// x = normalize(mu_j + sigma g), class-major order. Means are drawn first
/// (uniform on the sphere) when the spec leaves them empty.
inline LabeledFeatures gen_gaussian_sphere(const GaussianMixtureSpec& spec) {
  require(spec.n >= 1 && spec.k >= 1 && spec.m_per_class >= 1, ErrorKind::InvalidArgument,
          "dimension, classes and per-class count must be >= 1");
  require(spec.sigma > 0, ErrorKind::InvalidArgument, "sigma must be positive");
  Rng rng(spec.seed);
  Eigen::MatrixXd means = spec.means;
  if (means.size() == 0) {
    means.resize(spec.n, spec.k);
    for (int j = 0; j < spec.k; ++j) means.col(j) = gaussian_vector(rng, spec.n).normalized();
  }
  require(means.rows() == spec.n && means.cols() == spec.k, ErrorKind::Shape, "means must be n x k");
  for (int j = 0; j < spec.k; ++j) {
    require(std::abs(means.col(j).norm() - 1.0) < 1e-9, ErrorKind::InvalidArgument, "means must be unit vectors");
  }
  LabeledFeatures out;
  out.classes = spec.k;
  out.features.resize(spec.n, static_cast<Eigen::Index>(spec.k) * spec.m_per_class);
  Eigen::Index col = 0;
  for (int j = 0; j < spec.k; ++j) {
    for (int i = 0; i < spec.m_per_class; ++i, ++col) {
      out.features.col(col) = (means.col(j) + spec.sigma * gaussian_vector(rng, spec.n)).normalized();
      out.labels.push_back(j);
    }
  }
  return out;
}

/// Unit-sphere samples from one subspace per class. Orthogonal bases come
/// from a single QR of an n x sum(d_j) Gaussian matrix; otherwise each class
/// draws its own basis.
inline LabeledFeatures gen_orthogonal_subspaces(const SubspaceSpec& spec) {
  require(spec.n >= 1 && spec.k >= 1 && spec.m_per_class >= 1, ErrorKind::InvalidArgument,
          "dimension, classes and per-class count must be >= 1");
  require(static_cast<int>(spec.d_j.size()) == spec.k, ErrorKind::InvalidArgument, "need one d_j per class");
  for (int d : spec.d_j) {
    require(d >= 1 && d <= spec.n, ErrorKind::InvalidArgument, "subspace dimension outside [1, n]");
  }
  const int total = std::accumulate(spec.d_j.begin(), spec.d_j.end(), 0);
  require(!spec.orthogonal || total <= spec.n, ErrorKind::InvalidArgument,
          "orthogonal subspaces need sum(d_j) = " + std::to_string(total) + " <= n = " + std::to_string(spec.n));
  Rng rng(spec.seed);
  std::vector<Eigen::MatrixXd> bases;
  if (spec.orthogonal) {
    const Eigen::MatrixXd q = random_orthonormal(rng, spec.n, total);
    int offset = 0;
    for (int d : spec.d_j) {
      bases.push_back(q.middleCols(offset, d));
      offset += d;
    }
  } else {
    for (int d : spec.d_j) bases.push_back(random_orthonormal(rng, spec.n, d));
  }
  LabeledFeatures out;
  out.classes = spec.k;
  out.features.resize(spec.n, static_cast<Eigen::Index>(spec.k) * spec.m_per_class);
  Eigen::Index col = 0;
  for (int j = 0; j < spec.k; ++j) {
    const auto& u = bases[static_cast<std::size_t>(j)];
    for (int i = 0; i < spec.m_per_class; ++i, ++col) {
      Eigen::VectorXd z = u * gaussian_vector(rng, u.cols());
      out.features.col(col) = z / z.norm();
      out.labels.push_back(j);
    }
  }
  return out;
}

/// Unstructured baseline: i.i.d. Gaussian vectors on the sphere with
/// balanced labels.
inline LabeledFeatures gen_random_sphere(int n, int k, int m_per_class, std::uint64_t seed) {
  require(n >= 1 && k >= 1 && m_per_class >= 1, ErrorKind::InvalidArgument, "sizes must be >= 1");
  Rng rng(seed);
  LabeledFeatures out;
  out.classes = k;
  out.features = gaussian_matrix(rng, n, static_cast<Eigen::Index>(k) * m_per_class);
  out.features = normalize_columns(out.features);
  for (int j = 0; j < k; ++j) out.labels.insert(out.labels.end(), static_cast<std::size_t>(m_per_class), j);
  return out;
}

/// Bilinear sample of an image at fractional (row, col); zero outside.
inline double bilinear(const Eigen::MatrixXd& image, double row, double col) {
  const double r0 = std::floor(row), c0 = std::floor(col);
  const double fr = row - r0, fc = col - c0;
  auto at = [&](double r, double c) {
    if (r < 0 || c < 0 || r >= static_cast<double>(image.rows()) || c >= static_cast<double>(image.cols())) {
      return 0.0;
    }
    return image(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  };
  return (1 - fr) * (1 - fc) * at(r0, c0) + (1 - fr) * fc * at(r0, c0 + 1) + fr * (1 - fc) * at(r0 + 1, c0) +
         fr * fc * at(r0 + 1, c0 + 1);
}

/// Polar resampling: row i holds the image sampled on the circle of radius
/// r_i = (i + 1) R / C, R = min(H, W) / 2, about the image centre, at
/// angles 2 pi l / Gamma. The point for angle g is (row, col) =
/// (cy + r sin g, cx + r cos g). Bilinear, zero outside the image.
inline Eigen::MatrixXd polar_resample(const Eigen::MatrixXd& image, int gamma, int radii) {
  require(gamma >= 1 && radii >= 1, ErrorKind::InvalidArgument, "angle and radius counts must be >= 1");
  require(image.size() > 0, ErrorKind::Shape, "empty image");
  const double cy = (static_cast<double>(image.rows()) - 1.0) / 2.0;
  const double cx = (static_cast<double>(image.cols()) - 1.0) / 2.0;
  const double rmax = static_cast<double>(std::min(image.rows(), image.cols())) / 2.0;
  Eigen::MatrixXd out(radii, gamma);
  for (int i = 0; i < radii; ++i) {
    const double r = rmax * (i + 1) / radii;
    for (int l = 0; l < gamma; ++l) {
      const double angle = 2.0 * std::numbers::pi * l / gamma;
      out(i, l) = bilinear(image, cy + r * std::sin(angle), cx + r * std::cos(angle));
    }
  }
  return out;
}

/// m x H x W images to an m x C x Gamma batch (channels = radii).
inline Tensor polar_resample_batch(const Tensor& images, int gamma, int radii) {
  require(images.ndim() == 3, ErrorKind::Shape, "expected m x H x W images");
  const std::size_t m = images.extent(0), h = images.extent(1), w = images.extent(2);
  Tensor out({m, static_cast<std::uint64_t>(radii), static_cast<std::uint64_t>(gamma)});
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::MatrixXd img = Eigen::Map<const RowMajorMatrix>(images.data.data() + i * h * w,
                                                                 static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w));
    const RowMajorMatrix polar = polar_resample(img, gamma, radii);
    std::copy(polar.data(), polar.data() + polar.size(), out.data.begin() + static_cast<std::ptrdiff_t>(i * polar.size()));
  }
  return out;
}

/// out(h, w) = z((h - p) mod H, (w - q) mod W).
inline Eigen::MatrixXd translate2d(const Eigen::MatrixXd& image, long p, long q) {
  const long h = image.rows(), w = image.cols();
  Eigen::MatrixXd out(h, w);
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      out(r, c) = image((((r - p) % h) + h) % h, (((c - q) % w) + w) % w);
    }
  }
  return out;
}

enum class ShiftKind { OneD, TwoD };

struct AugmentedBatch {
  Tensor samples;
  std::vector<int> labels;
  std::size_t shifts_per_sample = 0;
};

/// Cyclic shifts at multiples of the stride along the last axis (1-D) or the
/// last two axes (2-D), every shift of sample i stored consecutively.
inline AugmentedBatch augment_shifts(const Tensor& x, const std::vector<int>& labels, long stride, ShiftKind kind) {
  require(stride > 0, ErrorKind::InvalidArgument, "stride must be positive");
  const std::size_t axes = kind == ShiftKind::OneD ? 1 : 2;
  require(x.ndim() >= axes + 1, ErrorKind::Shape, "batch lacks the axes to shift");
  require(labels.empty() || labels.size() == x.extent(0), ErrorKind::Shape, "label count != sample count");
  const std::size_t m = x.extent(0);
  const std::size_t w = x.extent(x.ndim() - 1);
  const std::size_t h = axes == 2 ? x.extent(x.ndim() - 2) : 1;
  const std::size_t plane = h * w;
  const std::size_t per_sample = x.size() / std::max<std::size_t>(m, 1);
  const std::size_t planes = per_sample / plane;
  const std::size_t sw = (w + static_cast<std::size_t>(stride) - 1) / static_cast<std::size_t>(stride);
  const std::size_t sh = axes == 2 ? (h + static_cast<std::size_t>(stride) - 1) / static_cast<std::size_t>(stride) : 1;
  const std::size_t shifts = sh * sw;

  AugmentedBatch out;
  out.shifts_per_sample = shifts;
  std::vector<std::uint64_t> shape = x.shape;
  shape[0] = m * shifts;
  out.samples = Tensor(shape);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t a = 0; a < sh; ++a) {
      for (std::size_t b = 0; b < sw; ++b) {
        const std::size_t p = a * static_cast<std::size_t>(stride), q = b * static_cast<std::size_t>(stride);
        const std::size_t dst_sample = i * shifts + a * sw + b;
        for (std::size_t c = 0; c < planes; ++c) {
          const double* src = x.data.data() + i * per_sample + c * plane;
          double* dst = out.samples.data.data() + dst_sample * per_sample + c * plane;
          for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t s = 0; s < w; ++s) dst[((r + p) % h) * w + (s + q) % w] = src[r * w + s];
          }
        }
        if (!labels.empty()) out.labels.push_back(labels[i]);
      }
    }
  }
  return out;
}

}  // namespace redunet
