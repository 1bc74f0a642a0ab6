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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "redunet/datagen.hpp"
#include "redunet/dense.hpp"
#include "test_util.hpp"

namespace redunet {
namespace {

using testing::random_matrix;
using testing::read_bytes;
using testing::TempDir;
using testing::write_bytes;

LabeledFeatures small_mixture(int m_per_class = 20, std::uint64_t seed = 3) {
  GaussianMixtureSpec spec;
  spec.n = 4;
  spec.k = 3;
  spec.m_per_class = m_per_class;
  spec.sigma = 0.3;
  spec.seed = seed;
  return gen_gaussian_sphere(spec);
}

TEST(SphereProject, Examples) {
  const Eigen::VectorXd p = sphere_project(Eigen::Vector2d(3, 4));
  EXPECT_DOUBLE_EQ(p(0), 0.6);
  EXPECT_DOUBLE_EQ(p(1), 0.8);
  EXPECT_EQ(sphere_project(p), p);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 10; ++i) {
    EXPECT_NEAR(sphere_project(random_matrix(gen, 7, 1).col(0)).norm(), 1.0, 1e-12);
  }
  EXPECT_THROW(sphere_project(Eigen::VectorXd::Zero(3)), Error);
}

DenseLayer scalar_layer(int n, double alpha, const std::vector<double>& alpha_j, const std::vector<double>& gamma) {
  DenseLayer layer;
  layer.E = alpha * Eigen::MatrixXd::Identity(n, n);
  for (double a : alpha_j) layer.C.push_back(a * Eigen::MatrixXd::Identity(n, n));
  layer.gamma_j = Eigen::Map<const Eigen::VectorXd>(gamma.data(), static_cast<Eigen::Index>(gamma.size()));
  return layer;
}

TEST(Membership, ZeroSharpnessIsUniform) {
  const DenseLayer layer = scalar_layer(3, 2.0, {1.0, 5.0, 9.0}, {0.2, 0.3, 0.5});
  const Eigen::VectorXd pi = estimate_membership(Eigen::Vector3d(1, 0, 0), layer, 0.0);
  EXPECT_TRUE(pi.isApprox(Eigen::Vector3d::Constant(1.0 / 3.0), 1e-15));
}

TEST(Membership, EqualNormsAreUniform) {
  const DenseLayer layer = scalar_layer(2, 2.0, {4.0, 4.0}, {0.5, 0.5});
  const Eigen::VectorXd pi = estimate_membership(Eigen::Vector2d(0.6, 0.8), layer, 500.0);
  EXPECT_NEAR(pi(0), 0.5, 1e-15);
  EXPECT_NEAR(pi.sum(), 1.0, 1e-12);
}

TEST(Membership, SharpSoftminSaturates) {
  DenseLayer layer = scalar_layer(2, 1.0, {0.0, 0.0}, {0.5, 0.5});
  layer.C[0].setZero();
  layer.C[1] = Eigen::Matrix2d::Identity();
  const Eigen::VectorXd pi = estimate_membership(Eigen::Vector2d(1, 0), layer, 500.0);
  EXPECT_NEAR(pi(0), 1.0, 1e-12);
  EXPECT_NEAR(pi(1), 0.0, 1e-12);
}

TEST(LayerIncrement, SingleClassUsesFullWeight) {
  std::mt19937_64 gen(2);
  DenseLayer layer;
  layer.E = random_matrix(gen, 3, 3);
  layer.C = {random_matrix(gen, 3, 3)};
  layer.gamma_j = Eigen::VectorXd::Ones(1);
  const Eigen::Vector3d z(0.0, 0.6, 0.8);
  EXPECT_TRUE(layer_increment(z, layer, 17.0).isApprox(layer.E * z - layer.C[0] * z, 1e-14));
}

TEST(LayerIncrement, ScalarOperatorsReduceToScalarMultiple) {
  const std::vector<double> alpha_j = {3.0, 5.0, 11.0}, gamma = {0.5, 0.3, 0.2};
  const DenseLayer layer = scalar_layer(4, 7.0, alpha_j, gamma);
  const Eigen::Vector4d z = Eigen::Vector4d(1, 2, 2, 4) / 5.0;
  for (double lambda : {0.0, 0.1, 2.0}) {
    // ||C^j z|| = alpha_j for unit z
    double denom = 0.0, weighted = 0.0;
    for (int j = 0; j < 3; ++j) denom += std::exp(-lambda * alpha_j[j]);
    for (int j = 0; j < 3; ++j) weighted += gamma[j] * alpha_j[j] * std::exp(-lambda * alpha_j[j]) / denom;
    EXPECT_TRUE(layer_increment(z, layer, lambda).isApprox((7.0 - weighted) * z, 1e-14));
  }
}

TEST(LayerIncrement, LabelsRecoverRateReductionGradient) {
  const LabeledFeatures data = small_mixture();
  const Membership pi = data.membership();
  const RateParams params = RateParams::make(4, pi, 0.5);
  const DenseLayer layer = build_dense_layer(data.features, pi, params);
  EXPECT_LT(label_increment_deviation(data.features, pi, layer, params), 1e-9);
}

TEST(Construct, ZeroStepKeepsFeatures) {
  const LabeledFeatures data = small_mixture();
  const Membership pi = data.membership();
  const DenseConstruction c = construct(data.features, pi, 1, 0.0, 0.5, 500.0);
  EXPECT_TRUE(c.features.isApprox(data.features, 1e-15));
  const RateParams params = RateParams::make(4, pi, 0.5);
  EXPECT_TRUE(c.model.layers[0].E.isApprox(expansion_operator(data.features, params)));
  EXPECT_TRUE(c.model.layers[0].C[2].isApprox(compression_operator(data.features, pi, 2, params)));
  ASSERT_EQ(c.loss_curve.size(), 1u);
}

TEST(Construct, RejectsNonUnitColumnsAndEmptyClasses) {
  const LabeledFeatures data = small_mixture();
  EXPECT_THROW(construct(2.0 * data.features, data.membership(), 2, 0.5, 0.5, 500.0), Error);
  try {
    construct(data.features, Membership::from_labels(data.labels, 5), 2, 0.5, 0.5, 500.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
  }
}

TEST(Construct, InvariantsHoldAcrossLayers) {
  const LabeledFeatures data = small_mixture(30, 4);
  const Membership pi = data.membership();
  ConstructOptions options;
  options.check_label_gradient = true;
  const DenseConstruction c = construct(data.features, pi, 40, 0.5, 0.5, 500.0, options);
  ASSERT_EQ(c.loss_curve.size(), 40u);
  EXPECT_LT((c.features.colwise().norm().array() - 1.0).abs().maxCoeff(), 1e-12);

  // replay layer by layer: recorded rates match the features entering the layer
  FeatureMatrix z = data.features;
  for (std::size_t l = 0; l < c.model.layers.size(); ++l) {
    const Rates r = rate_reduction(z, pi, 0.5);
    EXPECT_NEAR(r.dR, c.loss_curve[l].dR, 1e-10);
    Eigen::MatrixXd memberships;
    z = detail::apply_dense_layer(c.model.layers[l], z, 0.5, 500.0, &memberships);
    EXPECT_LT((memberships.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_GE(memberships.minCoeff(), 0.0);
    EXPECT_LE(memberships.maxCoeff(), 1.0);
    for (const auto& op : c.model.layers[l].C) EXPECT_LT((op - op.transpose()).cwiseAbs().maxCoeff(), 1e-8);
  }
  EXPECT_GT(c.loss_curve.back().dR, c.loss_curve.front().dR);
}

TEST(Construct, IsDeterministic) {
  const LabeledFeatures data = small_mixture();
  const DenseConstruction a = construct(data.features, data.membership(), 5, 0.5, 0.5, 500.0);
  const DenseConstruction b = construct(data.features, data.membership(), 5, 0.5, 0.5, 500.0);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.model.layers[4].E, b.model.layers[4].E);
}

TEST(Forward, ReplaysConstruction) {
  const LabeledFeatures data = small_mixture();
  const DenseConstruction c = construct(data.features, data.membership(), 10, 0.5, 0.5, 500.0);
  const FeatureMatrix out = forward(c.model, data.features);
  EXPECT_LT((out - c.features).cwiseAbs().maxCoeff(), 1e-10);
  const FeatureMatrix single = forward(c.model, data.features.col(7));
  EXPECT_LT((single.col(0) - c.features.col(7)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(forward(c.model, Eigen::MatrixXd::Ones(3, 2)), Error);
}

TEST(ModelFile, RoundTripIsExact) {
  const LabeledFeatures data = small_mixture();
  const DenseConstruction c = construct(data.features, data.membership(), 3, 0.5, 0.5, 500.0);
  TempDir dir;
  save_model(dir / "m.rnm", c.model);
  const ReduNetModel back = load_model(dir / "m.rnm");
  ASSERT_EQ(back.layers.size(), 3u);
  EXPECT_EQ(back.n, 4);
  EXPECT_EQ(back.k, 3);
  EXPECT_EQ(back.eta, 0.5);
  EXPECT_EQ(back.lambda, 500.0);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(back.layers[l].E, c.model.layers[l].E);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(back.layers[l].C[j], c.model.layers[l].C[j]);
    EXPECT_EQ(back.layers[l].gamma_j, c.model.layers[l].gamma_j);
  }
  EXPECT_EQ(forward(back, data.features), forward(c.model, data.features));
}

TEST(ModelFile, SizeArithmetic) {
  GaussianMixtureSpec spec;
  spec.n = 3;
  spec.k = 3;
  spec.m_per_class = 5;
  const LabeledFeatures data = gen_gaussian_sphere(spec);
  const DenseConstruction c = construct(data.features, data.membership(), 2, 0.5, 0.5, 500.0);
  TempDir dir;
  save_model(dir / "m.rnm", c.model);
  // magic + version + (L, n, k) + (eta, lambda, eps) + gamma + L (1 + k) n^2 reals
  const std::uintmax_t expected = 4 + 4 + 3 * 8 + 3 * 8 + 3 * 8 + 2 * (1 + 3) * 9 * 8;
  EXPECT_EQ(expected, 656u);
  EXPECT_EQ(std::filesystem::file_size(dir / "m.rnm"), expected);
}

TEST(ModelFile, CorruptFilesAreRejected) {
  const LabeledFeatures data = small_mixture();
  const DenseConstruction c = construct(data.features, data.membership(), 2, 0.5, 0.5, 500.0);
  TempDir dir;
  save_model(dir / "m.rnm", c.model);
  const auto bytes = read_bytes(dir / "m.rnm");
  auto expect_kind = [&](std::vector<unsigned char> b, ErrorKind kind) {
    write_bytes(dir / "bad.rnm", b);
    try {
      load_model(dir / "bad.rnm");
      ADD_FAILURE() << "expected " << to_string(kind);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), kind) << e.what();
    }
  };
  expect_kind({bytes.begin(), bytes.end() - 8}, ErrorKind::Truncated);
  auto magic = bytes;
  magic[0] = 'X';
  expect_kind(magic, ErrorKind::BadMagic);
  auto version = bytes;
  version[4] = 2;
  expect_kind(version, ErrorKind::VersionMismatch);
}

}  // namespace
}  // namespace redunet
