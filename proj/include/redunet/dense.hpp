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
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "redunet/error.hpp"
#include "redunet/rate.hpp"
#include "redunet/tensor.hpp"

namespace redunet {

/// Operators of one layer of the vector ReduNet.
struct DenseLayer {
  Eigen::MatrixXd E;
  std::vector<Eigen::MatrixXd> C;
  Eigen::VectorXd gamma_j;

  Eigen::Index dim() const { return E.rows(); }
  Eigen::Index classes() const { return static_cast<Eigen::Index>(C.size()); }
};

struct ReduNetModel {
  std::vector<DenseLayer> layers;
  double eta = 0.5;
  double lambda = 500.0;
  double eps = 0.1;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
};

struct DenseConstruction {
  ReduNetModel model;
  FeatureMatrix features;
  std::vector<Rates> loss_curve;  // rates of the features entering each layer
};

struct ConstructOptions {
  /// Re-derive each layer's increment with the true labels and require it to
  /// match the analytic rate-reduction gradient to 1e-9.
  bool check_label_gradient = false;
  double unit_norm_tol = 1e-9;
};

inline Eigen::VectorXd sphere_project(const Eigen::VectorXd& z) {
  const double norm = z.norm();
  require(norm > 0 && std::isfinite(norm), ErrorKind::Numeric, "cannot project a zero vector onto the sphere");
  return z / norm;
}

namespace detail {

/// Softmin of lambda * norms, computed stably.
inline Eigen::VectorXd softmin(const Eigen::VectorXd& norms, double lambda) {
  require(norms.allFinite(), ErrorKind::Numeric, "non-finite projection norm");
  Eigen::VectorXd logits = -lambda * norms;
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd p = logits.array().exp();
  return p / p.sum();
}

inline void require_unit_columns(const FeatureMatrix& z, double tol) {
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double norm = z.col(i).norm();
    require(std::abs(norm - 1.0) <= tol, ErrorKind::InvalidArgument,
            "column " + std::to_string(i) + " has norm " + std::to_string(norm) + ", expected unit norm");
  }
}

/// One layer applied to a batch of columns. Returns the updated, projected
/// features and the estimated memberships (k x m).
inline FeatureMatrix apply_dense_layer(const DenseLayer& layer, const FeatureMatrix& z, double eta, double lambda,
                                       Eigen::MatrixXd* memberships = nullptr) {
  const Eigen::Index k = layer.classes();
  std::vector<Eigen::MatrixXd> cz(static_cast<std::size_t>(k));
  Eigen::MatrixXd norms(k, z.cols());
  for (Eigen::Index j = 0; j < k; ++j) {
    cz[static_cast<std::size_t>(j)].noalias() = layer.C[static_cast<std::size_t>(j)] * z;
    norms.row(j) = cz[static_cast<std::size_t>(j)].colwise().norm();
  }
  FeatureMatrix increment = layer.E * z;
  Eigen::MatrixXd pi_hat(k, z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    pi_hat.col(i) = softmin(norms.col(i), lambda);
    for (Eigen::Index j = 0; j < k; ++j) {
      increment.col(i) -= layer.gamma_j(j) * pi_hat(j, i) * cz[static_cast<std::size_t>(j)].col(i);
    }
  }
  FeatureMatrix out = z + eta * increment;
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    const double norm = out.col(i).norm();
    require(norm > 0 && std::isfinite(norm), ErrorKind::Numeric, "feature collapsed to zero during update");
    out.col(i) /= norm;
  }
  if (memberships) *memberships = std::move(pi_hat);
  return out;
}

}  // namespace detail

/// Estimated class probabilities: softmin over j of lambda * ||C^j z||.
inline Eigen::VectorXd estimate_membership(const Eigen::VectorXd& z, const DenseLayer& layer, double lambda) {
  require(lambda >= 0, ErrorKind::InvalidArgument, "lambda must be non-negative");
  require(z.size() == layer.dim(), ErrorKind::Shape, "feature dimension does not match layer");
  Eigen::VectorXd norms(layer.classes());
  for (Eigen::Index j = 0; j < layer.classes(); ++j) norms(j) = (layer.C[static_cast<std::size_t>(j)] * z).norm();
  return detail::softmin(norms, lambda);
}

/// E z - sum_j gamma_j pi_j C^j z for a given membership column.
inline Eigen::VectorXd layer_increment_with_membership(const Eigen::VectorXd& z, const DenseLayer& layer,
                                                       const Eigen::VectorXd& membership) {
  require(z.size() == layer.dim(), ErrorKind::Shape, "feature dimension does not match layer");
  require(membership.size() == layer.classes(), ErrorKind::Shape, "membership length does not match classes");
  Eigen::VectorXd g = layer.E * z;
  for (Eigen::Index j = 0; j < layer.classes(); ++j) {
    g -= layer.gamma_j(j) * membership(j) * (layer.C[static_cast<std::size_t>(j)] * z);
  }
  return g;
}

inline Eigen::VectorXd layer_increment(const Eigen::VectorXd& z, const DenseLayer& layer, double lambda) {
  return layer_increment_with_membership(z, layer, estimate_membership(z, layer, lambda));
}

/// Operators of one layer built from the current training features.
inline DenseLayer build_dense_layer(const FeatureMatrix& z, const Membership& pi, const RateParams& params) {
  DenseLayer layer;
  layer.E = expansion_operator(z, params);
  layer.C.reserve(static_cast<std::size_t>(pi.classes()));
  for (Eigen::Index j = 0; j < pi.classes(); ++j) layer.C.push_back(compression_operator(z, pi, j, params));
  layer.gamma_j = params.gamma_j;
  return layer;
}

/// Largest entry-wise gap between the label-driven increments of a layer and
/// the analytic gradient of the rate reduction at z.
inline double label_increment_deviation(const FeatureMatrix& z, const Membership& pi, const DenseLayer& layer,
                                        const RateParams& params) {
  const Eigen::MatrixXd grad = rate_gradient(z, pi, params);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const Eigen::VectorXd g = layer_increment_with_membership(z.col(i), layer, pi.weights.col(i));
    worst = std::max(worst, (g - grad.col(i)).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Forward construction of an L-layer ReduNet by projected gradient ascent
/// on the rate reduction. Updates use the estimated membership, not the
/// labels, so that forward() replays the construction exactly.
inline DenseConstruction construct(const FeatureMatrix& z1, const Membership& pi, int layers, double eta, double eps,
                                   double lambda, const ConstructOptions& options = {}) {
  require(layers >= 1, ErrorKind::InvalidArgument, "layer count must be >= 1");
  require(eta >= 0 && std::isfinite(eta), ErrorKind::InvalidArgument, "eta must be non-negative");
  require(lambda >= 0, ErrorKind::InvalidArgument, "lambda must be non-negative");
  detail::require_finite(z1, "input features");
  detail::check_membership(z1, pi);
  for (Eigen::Index j = 0; j < pi.classes(); ++j) {
    require(pi.class_sizes(j) > 0, ErrorKind::EmptyClass, "class " + std::to_string(j) + " has no samples");
  }
  detail::require_unit_columns(z1, options.unit_norm_tol);

  const RateParams params = RateParams::make(z1.rows(), pi, eps);
  DenseConstruction out;
  out.model.eta = eta;
  out.model.lambda = lambda;
  out.model.eps = eps;
  out.model.n = z1.rows();
  out.model.k = pi.classes();
  out.model.layers.reserve(static_cast<std::size_t>(layers));
  out.loss_curve.reserve(static_cast<std::size_t>(layers));

  FeatureMatrix z = z1;
  for (int l = 0; l < layers; ++l) {
    out.loss_curve.push_back(rate_reduction(z, pi, eps));
    DenseLayer layer = build_dense_layer(z, pi, params);
    if (options.check_label_gradient) {
      const double dev = label_increment_deviation(z, pi, layer, params);
      require(dev <= 1e-9, ErrorKind::Numeric,
              "layer " + std::to_string(l) + ": label increment deviates from gradient by " + std::to_string(dev));
    }
    z = detail::apply_dense_layer(layer, z, eta, lambda);
    out.model.layers.push_back(std::move(layer));
  }
  out.features = std::move(z);
  return out;
}

/// Evaluates a constructed network on new (unit-norm) columns.
inline FeatureMatrix forward(const ReduNetModel& model, const FeatureMatrix& x) {
  require(x.rows() == model.n, ErrorKind::Shape,
          "input has " + std::to_string(x.rows()) + " rows, model expects " + std::to_string(model.n));
  detail::require_finite(x, "input features");
  FeatureMatrix z = x;
  for (const auto& layer : model.layers) z = detail::apply_dense_layer(layer, z, model.eta, model.lambda);
  return z;
}

// RNM1: "RNM1", u32 version, u64 L, u64 n, u64 k, f64 eta, f64 lambda,
// f64 eps, k x f64 gamma, then per layer E and C^1..C^k row-major.
inline constexpr std::uint32_t kDenseModelVersion = 1;

inline void save_model(const std::filesystem::path& path, const ReduNetModel& model) {
  require(!model.layers.empty(), ErrorKind::InvalidArgument, "model has no layers");
  detail::BinaryWriter w(path);
  w.bytes("RNM1", 4);
  w.value(kDenseModelVersion);
  w.value(static_cast<std::uint64_t>(model.layers.size()));
  w.value(static_cast<std::uint64_t>(model.n));
  w.value(static_cast<std::uint64_t>(model.k));
  w.value(model.eta);
  w.value(model.lambda);
  w.value(model.eps);
  const auto& gamma = model.layers.front().gamma_j;
  require(gamma.size() == model.k, ErrorKind::Shape, "gamma length does not match class count");
  w.reals(gamma.data(), static_cast<std::size_t>(gamma.size()));
  auto put = [&](const Eigen::MatrixXd& m) {
    require(m.rows() == model.n && m.cols() == model.n, ErrorKind::Shape, "operator is not n x n");
    const RowMajorMatrix rm = m;
    w.reals(rm.data(), static_cast<std::size_t>(rm.size()));
  };
  for (const auto& layer : model.layers) {
    require(layer.classes() == model.k, ErrorKind::Shape, "layer class count does not match model");
    put(layer.E);
    for (const auto& c : layer.C) put(c);
  }
  w.close();
}

inline ReduNetModel load_model(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("RNM1");
  const auto version = r.value<std::uint32_t>();
  require(version == kDenseModelVersion, ErrorKind::VersionMismatch,
          path.string() + ": version " + std::to_string(version));
  const auto layers = r.value<std::uint64_t>();
  const auto n = r.value<std::uint64_t>();
  const auto k = r.value<std::uint64_t>();
  ReduNetModel model;
  model.eta = r.value<double>();
  model.lambda = r.value<double>();
  model.eps = r.value<double>();
  model.n = static_cast<Eigen::Index>(n);
  model.k = static_cast<Eigen::Index>(k);
  require(layers >= 1 && n >= 1 && k >= 1, ErrorKind::Format, path.string() + ": empty model dimensions");
  require(layers * (1 + k) <= r.remaining() / (n * n * 8), ErrorKind::Truncated,
          path.string() + ": operator payload shorter than header declares");
  Eigen::VectorXd gamma(model.k);
  r.reals(gamma.data(), k);
  auto get = [&] {
    RowMajorMatrix rm(model.n, model.n);
    r.reals(rm.data(), n * n);
    return Eigen::MatrixXd(rm);
  };
  model.layers.resize(layers);
  for (auto& layer : model.layers) {
    layer.E = get();
    layer.C.resize(k);
    for (auto& c : layer.C) c = get();
    layer.gamma_j = gamma;
  }
  r.expect_end();
  return model;
}

}  // namespace redunet
