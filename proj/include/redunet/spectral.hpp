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
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "redunet/dense.hpp"
#include "redunet/dft.hpp"
#include "redunet/error.hpp"
#include "redunet/random.hpp"
#include "redunet/rate.hpp"
#include "redunet/tensor.hpp"

namespace redunet {

enum class InvariantKind : std::uint8_t { Shift1D = 1, Translate2D = 2 };

/// Per-sample geometry of a multi-channel signal. 1-D signals are the
/// height == 1 case; frequency bins are indexed row-major, p * width + q.
struct SignalShape {
  InvariantKind kind = InvariantKind::Shift1D;
  std::size_t channels = 0;
  std::size_t height = 1;
  std::size_t width = 0;

  std::size_t bins() const { return height * width; }
  std::size_t sample_size() const { return channels * bins(); }

  /// Reads the geometry of an m x C x T or m x C x H x W batch.
  static SignalShape of(const Tensor& batch) {
    SignalShape s;
    if (batch.ndim() == 3) {
      s.kind = InvariantKind::Shift1D;
      s.channels = batch.extent(1);
      s.width = batch.extent(2);
    } else if (batch.ndim() == 4) {
      s.kind = InvariantKind::Translate2D;
      s.channels = batch.extent(1);
      s.height = batch.extent(2);
      s.width = batch.extent(3);
    } else {
      fail(ErrorKind::Shape, "multi-channel batch must be m x C x T or m x C x H x W");
    }
    require(s.channels >= 1 && s.bins() >= 1, ErrorKind::Shape, "empty signal geometry");
    return s;
  }

  std::vector<std::uint64_t> batch_shape(std::size_t m) const {
    if (kind == InvariantKind::Shift1D) return {m, channels, width};
    return {m, channels, height, width};
  }

  friend bool operator==(const SignalShape&, const SignalShape&) = default;
};

/// A batch in the frequency domain: bins[p] is the C x m matrix of every
/// sample's channel spectrum at bin p.
struct SpectralBatch {
  SignalShape shape;
  Eigen::Index samples = 0;
  std::vector<Eigen::MatrixXcd> bins;
};

/// Multi-channel unitary DFT over the signal axes of a batch.
class SpectralTransform {
 public:
  explicit SpectralTransform(const SignalShape& shape) : shape_(shape), dft_(shape.height, shape.width) {}

  SpectralBatch forward(const Tensor& batch) {
    require(SignalShape::of(batch) == shape_, ErrorKind::Shape, "batch geometry does not match transform");
    const std::size_t m = batch.extent(0);
    const std::size_t nb = shape_.bins();
    SpectralBatch out;
    out.shape = shape_;
    out.samples = static_cast<Eigen::Index>(m);
    out.bins.assign(nb, Eigen::MatrixXcd(static_cast<Eigen::Index>(shape_.channels), out.samples));
    std::vector<cplx> in(nb), spec(nb);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < shape_.channels; ++c) {
        const double* src = batch.data.data() + (i * shape_.channels + c) * nb;
        for (std::size_t p = 0; p < nb; ++p) in[p] = src[p];
        dft_.forward(in, spec);
        for (std::size_t p = 0; p < nb; ++p) {
          out.bins[p](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = spec[p];
        }
      }
    }
    return out;
  }

  /// Back to the signal domain; imaginary residue is dropped.
  Tensor inverse(const SpectralBatch& v) {
    require(v.shape == shape_, ErrorKind::Shape, "spectrum geometry does not match transform");
    const std::size_t m = static_cast<std::size_t>(v.samples);
    const std::size_t nb = shape_.bins();
    Tensor out(shape_.batch_shape(m));
    std::vector<cplx> spec(nb), sig(nb);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < shape_.channels; ++c) {
        for (std::size_t p = 0; p < nb; ++p) {
          spec[p] = v.bins[p](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i));
        }
        dft_.inverse(spec, sig);
        double* dst = out.data.data() + (i * shape_.channels + c) * nb;
        for (std::size_t p = 0; p < nb; ++p) dst[p] = sig[p].real();
      }
    }
    return out;
  }

 private:
  SignalShape shape_;
  UnitaryDft2d dft_;
};

/// Per-bin operators of one invariant layer: E[p] and C[j][p] are C x C
/// Hermitian positive definite.
struct SpectralLayer {
  std::vector<Eigen::MatrixXcd> E;
  std::vector<std::vector<Eigen::MatrixXcd>> C;
  Eigen::VectorXd gamma_j;

  Eigen::Index classes() const { return static_cast<Eigen::Index>(C.size()); }
};

struct InvariantModel {
  SignalShape shape;
  Eigen::Index k = 0;
  double eta = 0.5;
  double lambda = 500.0;
  double eps = 0.1;
  std::vector<SpectralLayer> layers;
};

/// Work counters for one layer build.
struct LayerStats {
  std::size_t inversions = 0;
  std::size_t inversion_size = 0;
};

struct InvariantOptions {
  /// Extra batches carried through every layer with estimated membership,
  /// exactly as forward() would, without the layers having to be retained.
  std::vector<Tensor> riders;
  /// When false, layers are dropped after use; needed when the full model
  /// does not fit in memory.
  bool keep_layers = true;
  double unit_norm_tol = 1e-9;
  /// Called after each layer with its index and the pre-update rates.
  std::function<void(int, const Rates&)> on_layer;
};

struct InvariantConstruction {
  InvariantModel model;
  Tensor features;
  std::vector<Rates> loss_curve;
  std::vector<Tensor> riders;
  LayerStats last_layer_stats;
};

/// Scales every sample of a batch (leading axis) to unit Frobenius norm.
inline Tensor normalize_samples(Tensor batch) {
  require(batch.ndim() >= 2, ErrorKind::Shape, "batch needs a leading sample axis");
  const std::size_t m = batch.extent(0);
  const std::size_t stride = batch.size() / std::max<std::size_t>(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    Eigen::Map<Eigen::VectorXd> v(batch.data.data() + i * stride, static_cast<Eigen::Index>(stride));
    const double norm = v.norm();
    require(norm > 0, ErrorKind::Numeric, "sample " + std::to_string(i) + " has zero norm");
    v /= norm;
  }
  return batch;
}

namespace detail {

inline void require_unit_samples(const Tensor& batch, double tol) {
  const std::size_t m = batch.extent(0);
  const std::size_t stride = batch.size() / std::max<std::size_t>(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    Eigen::Map<const Eigen::VectorXd> v(batch.data.data() + i * stride, static_cast<Eigen::Index>(stride));
    const double norm = v.norm();
    require(std::abs(norm - 1.0) <= tol, ErrorKind::InvalidArgument,
            "sample " + std::to_string(i) + " has Frobenius norm " + std::to_string(norm) + ", expected 1");
  }
}

/// alpha (I + alpha * scale * Y Y^H)^{-1} for one bin, plus its log det term.
inline Eigen::MatrixXcd spectral_resolvent(const Eigen::MatrixXcd& y, double alpha, double scale, double* logdet) {
  const Eigen::Index c = y.rows();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(c, c);
  if (y.cols() > 0) a.selfadjointView<Eigen::Lower>().rankUpdate(y, alpha * scale);
  Eigen::LLT<Eigen::MatrixXcd> llt(a.selfadjointView<Eigen::Lower>());
  require(llt.info() == Eigen::Success, ErrorKind::Numeric, "per-bin operator inversion failed");
  if (logdet) *logdet = 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
  Eigen::MatrixXcd out = alpha * llt.solve(Eigen::MatrixXcd::Identity(c, c));
  return 0.5 * (out + out.adjoint());
}

inline Eigen::MatrixXcd weighted_columns(const Eigen::MatrixXcd& v, const Eigen::VectorXd& w) {
  Eigen::Index count = (w.array() > 0).count();
  Eigen::MatrixXcd y(v.rows(), count);
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    if (w(i) > 0) y.col(c++) = std::sqrt(w(i)) * v.col(i);
  }
  return y;
}

/// Builds E[p], C[j][p] for every bin from the training spectrum and
/// evaluates the shift-invariant rates (1/T) DeltaR(circ(Z), Pi) from the
/// same factorizations.
inline SpectralLayer build_spectral_layer(const SpectralBatch& v, const Membership& pi, const RateParams& params,
                                          Rates* rates, LayerStats* stats) {
  const std::size_t nb = v.shape.bins();
  const double scale = static_cast<double>(nb);
  const Eigen::Index k = pi.classes();
  const double m = static_cast<double>(v.samples);
  SpectralLayer layer;
  layer.gamma_j = params.gamma_j;
  layer.E.resize(nb);
  layer.C.assign(static_cast<std::size_t>(k), std::vector<Eigen::MatrixXcd>(nb));
  double r_sum = 0.0, rc_sum = 0.0;
  std::size_t inversions = 0;
  for (std::size_t p = 0; p < nb; ++p) {
    double ld = 0.0;
    layer.E[p] = spectral_resolvent(v.bins[p], params.alpha, scale, &ld);
    r_sum += ld;
    ++inversions;
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::VectorXd w = pi.weights.row(j).transpose();
      layer.C[static_cast<std::size_t>(j)][p] =
          spectral_resolvent(weighted_columns(v.bins[p], w), params.alpha_j(j), scale, &ld);
      rc_sum += pi.class_sizes(j) / (2.0 * m) * ld;
      ++inversions;
    }
  }
  if (rates) {
    rates->R = r_sum / (2.0 * scale);
    rates->Rc = rc_sum / scale;
    rates->dR = rates->R - rates->Rc;
  }
  if (stats) {
    stats->inversions = inversions;
    stats->inversion_size = v.shape.channels;
  }
  return layer;
}

/// One invariant layer applied in place. Memberships come from the
/// projection norms aggregated over all bins; each sample is then
/// renormalized to unit Frobenius norm. Samples are processed in chunks to
/// bound the memory held for the per-class projections.
inline void apply_spectral_layer(const SpectralLayer& layer, SpectralBatch& v, double eta, double lambda) {
  const std::size_t nb = v.shape.bins();
  const Eigen::Index k = layer.classes();
  const Eigen::Index ch = static_cast<Eigen::Index>(v.shape.channels);
  require(layer.E.size() == nb, ErrorKind::Shape, "layer bin count does not match signal");
  const std::size_t per_sample = static_cast<std::size_t>(k) * nb * static_cast<std::size_t>(ch) * sizeof(cplx);
  const Eigen::Index chunk =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>((std::size_t{256} << 20) / std::max<std::size_t>(per_sample, 1)));
  std::vector<std::vector<Eigen::MatrixXcd>> proj(static_cast<std::size_t>(k), std::vector<Eigen::MatrixXcd>(nb));
  for (Eigen::Index i0 = 0; i0 < v.samples; i0 += chunk) {
    const Eigen::Index nc = std::min(chunk, v.samples - i0);
    Eigen::MatrixXd norms2 = Eigen::MatrixXd::Zero(k, nc);
    for (std::size_t p = 0; p < nb; ++p) {
      const auto block = v.bins[p].middleCols(i0, nc);
      for (Eigen::Index j = 0; j < k; ++j) {
        auto& w = proj[static_cast<std::size_t>(j)][p];
        w.noalias() = layer.C[static_cast<std::size_t>(j)][p] * block;
        norms2.row(j) += w.colwise().squaredNorm();
      }
    }
    Eigen::MatrixXd pi_hat(k, nc);
    for (Eigen::Index i = 0; i < nc; ++i) pi_hat.col(i) = softmin(norms2.col(i).cwiseSqrt(), lambda);
    Eigen::VectorXd sample_norm2 = Eigen::VectorXd::Zero(nc);
    for (std::size_t p = 0; p < nb; ++p) {
      auto block = v.bins[p].middleCols(i0, nc);
      Eigen::MatrixXcd g = layer.E[p] * block;
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd weight = layer.gamma_j(j) * pi_hat.row(j).transpose();
        g -= proj[static_cast<std::size_t>(j)][p] * weight.cast<cplx>().asDiagonal();
      }
      block += eta * g;
      sample_norm2 += block.colwise().squaredNorm().transpose();
    }
    for (Eigen::Index i = 0; i < nc; ++i) {
      require(sample_norm2(i) > 0 && std::isfinite(sample_norm2(i)), ErrorKind::Numeric,
              "sample collapsed to zero during update");
    }
    const Eigen::VectorXd inv_norm = sample_norm2.cwiseSqrt().cwiseInverse();
    for (std::size_t p = 0; p < nb; ++p) {
      v.bins[p].middleCols(i0, nc) *= inv_norm.cast<cplx>().asDiagonal();
    }
  }
}

inline void check_invariant_inputs(const Tensor& zbar, const Membership& pi, int layers, double eta, double lambda) {
  require(layers >= 1, ErrorKind::InvalidArgument, "layer count must be >= 1");
  require(eta >= 0 && std::isfinite(eta), ErrorKind::InvalidArgument, "eta must be non-negative");
  require(lambda >= 0, ErrorKind::InvalidArgument, "lambda must be non-negative");
  require(pi.samples() == static_cast<Eigen::Index>(zbar.extent(0)), ErrorKind::Shape,
          "membership sample count does not match batch");
  pi.validate();
  for (Eigen::Index j = 0; j < pi.classes(); ++j) {
    require(pi.class_sizes(j) > 0, ErrorKind::EmptyClass, "class " + std::to_string(j) + " has no samples");
  }
  require(std::all_of(zbar.data.begin(), zbar.data.end(), [](double x) { return std::isfinite(x); }),
          ErrorKind::Numeric, "input batch contains non-finite entries");
}

}  // namespace detail

/// Shift/translation-invariant ReduNet constructed per frequency bin.
///
/// alpha = C / (m eps^2) and alpha_j = C / (m_j eps^2). Bin operators use the
/// Gram V(p) V(p)^H scaled by the bin count, which makes them the exact
/// spectral blocks of the dense operators of the circulant-expanded data.
inline InvariantConstruction construct_invariant(const Tensor& zbar, const Membership& pi, int layers, double eta,
                                                 double eps, double lambda, InvariantOptions options = {}) {
  const SignalShape shape = SignalShape::of(zbar);
  detail::check_invariant_inputs(zbar, pi, layers, eta, lambda);
  detail::require_unit_samples(zbar, options.unit_norm_tol);
  for (const auto& rider : options.riders) {
    require(SignalShape::of(rider) == shape, ErrorKind::Shape, "rider batch geometry does not match training");
  }
  const RateParams params = RateParams::make(static_cast<Eigen::Index>(shape.channels), pi, eps);

  InvariantConstruction out;
  out.model.shape = shape;
  out.model.k = pi.classes();
  out.model.eta = eta;
  out.model.lambda = lambda;
  out.model.eps = eps;

  SpectralTransform transform(shape);
  SpectralBatch v = transform.forward(zbar);
  std::vector<SpectralBatch> riders;
  riders.reserve(options.riders.size());
  for (const auto& r : options.riders) riders.push_back(transform.forward(r));
  options.riders.clear();

  for (int l = 0; l < layers; ++l) {
    Rates rates;
    SpectralLayer layer = detail::build_spectral_layer(v, pi, params, &rates, &out.last_layer_stats);
    out.loss_curve.push_back(rates);
    detail::apply_spectral_layer(layer, v, eta, lambda);
    for (auto& r : riders) detail::apply_spectral_layer(layer, r, eta, lambda);
    if (options.keep_layers) out.model.layers.push_back(std::move(layer));
    if (options.on_layer) options.on_layer(l, rates);
  }
  out.features = transform.inverse(v);
  for (const auto& r : riders) out.riders.push_back(transform.inverse(r));
  return out;
}

inline InvariantConstruction construct_inv1d(const Tensor& zbar, const Membership& pi, int layers, double eta,
                                             double eps, double lambda, InvariantOptions options = {}) {
  require(zbar.ndim() == 3, ErrorKind::Shape, "1-D invariant construction expects an m x C x T batch");
  return construct_invariant(zbar, pi, layers, eta, eps, lambda, std::move(options));
}

inline InvariantConstruction construct_inv2d(const Tensor& zbar, const Membership& pi, int layers, double eta,
                                             double eps, double lambda, InvariantOptions options = {}) {
  require(zbar.ndim() == 4, ErrorKind::Shape, "2-D invariant construction expects an m x C x H x W batch");
  return construct_invariant(zbar, pi, layers, eta, eps, lambda, std::move(options));
}

inline Tensor forward_invariant(const InvariantModel& model, const Tensor& zbar) {
  require(!model.layers.empty(), ErrorKind::InvalidArgument, "model has no stored layers");
  const SignalShape shape = SignalShape::of(zbar);
  require(shape == model.shape, ErrorKind::Shape, "input geometry does not match the model");
  require(std::all_of(zbar.data.begin(), zbar.data.end(), [](double x) { return std::isfinite(x); }),
          ErrorKind::Numeric, "input batch contains non-finite entries");
  SpectralTransform transform(shape);
  SpectralBatch v = transform.forward(zbar);
  for (const auto& layer : model.layers) detail::apply_spectral_layer(layer, v, model.eta, model.lambda);
  return transform.inverse(v);
}

inline Tensor forward_inv1d(const InvariantModel& model, const Tensor& zbar) {
  require(model.shape.kind == InvariantKind::Shift1D && zbar.ndim() == 3, ErrorKind::Shape,
          "1-D forward expects a shift-invariant model and an m x C x T batch");
  return forward_invariant(model, zbar);
}

inline Tensor forward_inv2d(const InvariantModel& model, const Tensor& zbar) {
  require(model.shape.kind == InvariantKind::Translate2D && zbar.ndim() == 4, ErrorKind::Shape,
          "2-D forward expects a translation-invariant model and an m x C x H x W batch");
  return forward_invariant(model, zbar);
}

// RNS1: "RNS1", u32 version, u8 kind, u64 dims (C,T) or (C,H,W), u64 k,
// u64 L, f64 eta, f64 lambda, f64 eps, k x f64 gamma, then per layer and per
// bin E(p), C^1(p)..C^k(p) as row-major C x C complex, real/imag interleaved.
inline constexpr std::uint32_t kInvariantModelVersion = 1;

inline void save_invariant_model(const std::filesystem::path& path, const InvariantModel& model) {
  require(!model.layers.empty(), ErrorKind::InvalidArgument, "model has no stored layers");
  const auto& s = model.shape;
  detail::BinaryWriter w(path);
  w.bytes("RNS1", 4);
  w.value(kInvariantModelVersion);
  w.value(static_cast<std::uint8_t>(s.kind));
  w.value(static_cast<std::uint64_t>(s.channels));
  if (s.kind == InvariantKind::Translate2D) w.value(static_cast<std::uint64_t>(s.height));
  w.value(static_cast<std::uint64_t>(s.width));
  w.value(static_cast<std::uint64_t>(model.k));
  w.value(static_cast<std::uint64_t>(model.layers.size()));
  w.value(model.eta);
  w.value(model.lambda);
  w.value(model.eps);
  const auto& gamma = model.layers.front().gamma_j;
  require(gamma.size() == model.k, ErrorKind::Shape, "gamma length does not match class count");
  w.reals(gamma.data(), static_cast<std::size_t>(gamma.size()));
  const auto c = static_cast<Eigen::Index>(s.channels);
  auto put = [&](const Eigen::MatrixXcd& m) {
    require(m.rows() == c && m.cols() == c, ErrorKind::Shape, "bin operator is not C x C");
    const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    w.reals(reinterpret_cast<const double*>(rm.data()), static_cast<std::size_t>(2 * rm.size()));
  };
  for (const auto& layer : model.layers) {
    require(layer.E.size() == s.bins() && layer.classes() == model.k, ErrorKind::Shape, "layer shape mismatch");
    for (std::size_t p = 0; p < s.bins(); ++p) {
      put(layer.E[p]);
      for (const auto& cj : layer.C) put(cj[p]);
    }
  }
  w.close();
}

inline InvariantModel load_invariant_model(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("RNS1");
  const auto version = r.value<std::uint32_t>();
  require(version == kInvariantModelVersion, ErrorKind::VersionMismatch,
          path.string() + ": version " + std::to_string(version));
  const auto kind = r.value<std::uint8_t>();
  require(kind == 1 || kind == 2, ErrorKind::Format, path.string() + ": unknown model kind " + std::to_string(kind));
  InvariantModel model;
  model.shape.kind = static_cast<InvariantKind>(kind);
  model.shape.channels = r.value<std::uint64_t>();
  if (model.shape.kind == InvariantKind::Translate2D) model.shape.height = r.value<std::uint64_t>();
  model.shape.width = r.value<std::uint64_t>();
  const auto k = r.value<std::uint64_t>();
  const auto layers = r.value<std::uint64_t>();
  model.k = static_cast<Eigen::Index>(k);
  model.eta = r.value<double>();
  model.lambda = r.value<double>();
  model.eps = r.value<double>();
  const std::size_t c = model.shape.channels;
  const std::size_t nb = model.shape.bins();
  require(c >= 1 && nb >= 1 && k >= 1 && layers >= 1, ErrorKind::Format, path.string() + ": empty dimensions");
  require(layers * nb * (1 + k) <= r.remaining() / (c * c * 16), ErrorKind::Truncated,
          path.string() + ": operator payload shorter than header declares");
  Eigen::VectorXd gamma(model.k);
  r.reals(gamma.data(), k);
  auto get = [&] {
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(c, c);
    r.reals(reinterpret_cast<double*>(rm.data()), 2 * c * c);
    return Eigen::MatrixXcd(rm);
  };
  model.layers.resize(layers);
  for (auto& layer : model.layers) {
    layer.gamma_j = gamma;
    layer.E.resize(nb);
    layer.C.assign(k, std::vector<Eigen::MatrixXcd>(nb));
    for (std::size_t p = 0; p < nb; ++p) {
      layer.E[p] = get();
      for (auto& cj : layer.C) cj[p] = get();
    }
  }
  r.expect_end();
  return model;
}

/// s(v) = sign(v) max(|v| - tau, 0), element-wise.
inline Tensor soft_threshold(Tensor t, double tau) {
  require(tau >= 0, ErrorKind::InvalidArgument, "threshold must be non-negative");
  for (auto& v : t.data) v = std::copysign(std::max(std::abs(v) - tau, 0.0), v);
  return t;
}

/// C_out x C_in x K (1-D) or C_out x C_in x K x K (2-D) standard normal
/// kernels, drawn in row-major order from one seeded stream.
inline Tensor random_kernels(std::size_t out_channels, std::size_t in_channels, std::size_t size, bool two_d,
                             std::uint64_t seed) {
  require(out_channels >= 1 && in_channels >= 1 && size >= 1, ErrorKind::InvalidArgument, "empty kernel bank");
  std::vector<std::uint64_t> shape{out_channels, in_channels, size};
  if (two_d) shape.push_back(size);
  Tensor k(shape);
  Rng rng(seed);
  for (auto& v : k.data) v = rng.normal();
  return k;
}

/// Multi-channel circular convolution of every sample with a kernel bank.
/// X is m x T or m x C_in x T (1-D kernels), m x H x W or m x C_in x H x W
/// (2-D kernels). Output is m x C_out x T or m x C_out x H x W.
inline Tensor circular_lift(const Tensor& x, const Tensor& kernels) {
  const bool two_d = kernels.ndim() == 4;
  require(kernels.ndim() == 3 || two_d, ErrorKind::Shape, "kernel bank must be 3-D or 4-D");
  const std::size_t c_out = kernels.extent(0), c_in = kernels.extent(1), ksize = kernels.extent(2);
  const std::size_t signal_axes = two_d ? 2 : 1;
  const bool has_channels = x.ndim() == signal_axes + 2;
  require(x.ndim() == signal_axes + 1 || has_channels, ErrorKind::Shape, "input rank does not match kernel bank");
  require((has_channels ? x.extent(1) : 1) == c_in, ErrorKind::Shape, "input channels do not match kernel bank");
  const std::size_t m = x.extent(0);
  const std::size_t h = two_d ? x.extent(x.ndim() - 2) : 1;
  const std::size_t w = x.extent(x.ndim() - 1);
  require(ksize <= w && (!two_d || ksize <= h), ErrorKind::InvalidArgument,
          "kernel size " + std::to_string(ksize) + " exceeds signal length");
  const std::size_t nb = h * w;
  const std::size_t kh = two_d ? ksize : 1;
  Tensor out(two_d ? std::vector<std::uint64_t>{m, c_out, h, w} : std::vector<std::uint64_t>{m, c_out, w});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t co = 0; co < c_out; ++co) {
      double* dst = out.data.data() + (i * c_out + co) * nb;
      for (std::size_t ci = 0; ci < c_in; ++ci) {
        const double* src = x.data.data() + (i * c_in + ci) * nb;
        const double* ker = kernels.data.data() + (co * c_in + ci) * kh * ksize;
        for (std::size_t a = 0; a < kh; ++a) {
          for (std::size_t b = 0; b < ksize; ++b) {
            const double kv = ker[a * ksize + b];
            for (std::size_t r = 0; r < h; ++r) {
              const std::size_t sr = (r + h - a) % h;
              for (std::size_t s = 0; s < w; ++s) dst[r * w + s] += kv * src[sr * w + (s + w - b) % w];
            }
          }
        }
      }
    }
  }
  return out;
}

/// Random Gaussian lifting of 1-D signals followed by soft thresholding.
inline Tensor lift_random_filters_1d(const Tensor& x, std::size_t channels, std::size_t kernel, std::uint64_t seed,
                                     double tau) {
  require(x.ndim() == 2 || x.ndim() == 3, ErrorKind::Shape, "1-D lifting expects m x T or m x C_in x T");
  require(kernel <= x.extent(x.ndim() - 1), ErrorKind::InvalidArgument, "kernel longer than signal");
  const std::size_t c_in = x.ndim() == 3 ? x.extent(1) : 1;
  return soft_threshold(circular_lift(x, random_kernels(channels, c_in, kernel, false, seed)), tau);
}

/// 2-D analogue with K x K kernels.
inline Tensor lift_random_filters_2d(const Tensor& x, std::size_t channels, std::size_t kernel, std::uint64_t seed,
                                     double tau) {
  require(x.ndim() == 3 || x.ndim() == 4, ErrorKind::Shape, "2-D lifting expects m x H x W or m x C_in x H x W");
  const std::size_t c_in = x.ndim() == 4 ? x.extent(1) : 1;
  return soft_threshold(circular_lift(x, random_kernels(channels, c_in, kernel, true, seed)), tau);
}

}  // namespace redunet
