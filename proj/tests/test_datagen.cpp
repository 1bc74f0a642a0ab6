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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "redunet/datagen.hpp"
#include "test_util.hpp"

namespace redunet {
namespace {

using testing::random_matrix;

TEST(Rng, StreamIsFixedBySeed) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    EXPECT_TRUE(std::isfinite(x));
  }
  EXPECT_NE(Rng(42).next_u64(), c.next_u64());
  // first output of the 64-bit Mersenne twister with the default seed
  EXPECT_EQ(Rng(5489).next_u64(), 14514284786278117030ull);
}

TEST(Rng, NormalMomentsAndBoundedDraws) {
  Rng rng(1);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(GaussianSphere, VanishingNoiseReturnsMeans) {
  GaussianMixtureSpec spec;
  spec.sigma = 1e-12;
  spec.m_per_class = 4;
  spec.seed = 2;
  const LabeledFeatures data = gen_gaussian_sphere(spec);
  GaussianMixtureSpec again = spec;
  again.m_per_class = 1;
  const LabeledFeatures means = gen_gaussian_sphere(again);  // the means are drawn first
  for (int i = 0; i < 12; ++i) {
    const int j = data.labels[static_cast<std::size_t>(i)];
    EXPECT_LT((data.features.col(i) - means.features.col(j)).norm(), 1e-10);
  }
}

TEST(GaussianSphere, UnitColumnsAndConcentration) {
  GaussianMixtureSpec spec;
  spec.seed = 3;
  const LabeledFeatures data = gen_gaussian_sphere(spec);
  ASSERT_EQ(data.features.cols(), 1500);
  EXPECT_LT((data.features.colwise().norm().array() - 1.0).abs().maxCoeff(), 1e-12);
  for (int j = 0; j < 3; ++j) {
    const Eigen::MatrixXd block = data.features.middleCols(j * 500, 500);
    const Eigen::VectorXd center = block.rowwise().mean().normalized();
    EXPECT_GT((center.transpose() * block).mean(), 0.98);
  }
}

TEST(GaussianSphere, DeterministicPerSeed) {
  GaussianMixtureSpec spec;
  spec.m_per_class = 10;
  spec.seed = 4;
  EXPECT_EQ(gen_gaussian_sphere(spec).features, gen_gaussian_sphere(spec).features);
  GaussianMixtureSpec other = spec;
  other.seed = 5;
  EXPECT_NE(gen_gaussian_sphere(spec).features, gen_gaussian_sphere(other).features);
}

TEST(Subspaces, OneDimensionalClassesAreOrthogonal) {
  SubspaceSpec spec;
  spec.n = 5;
  spec.k = 2;
  spec.d_j = {1, 1};
  spec.m_per_class = 6;
  spec.seed = 6;
  const LabeledFeatures data = gen_orthogonal_subspaces(spec);
  const Eigen::MatrixXd cross = data.features.leftCols(6).transpose() * data.features.rightCols(6);
  EXPECT_LT(cross.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Subspaces, ClassBlocksHaveTheRequestedRank) {
  SubspaceSpec spec;
  spec.n = 40;
  spec.k = 3;
  spec.d_j = {2, 5, 7};
  spec.m_per_class = 20;
  spec.seed = 7;
  const LabeledFeatures data = gen_orthogonal_subspaces(spec);
  for (int j = 0; j < 3; ++j) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(data.features.middleCols(j * 20, 20));
    const auto& sv = svd.singularValues();
    EXPECT_EQ((sv.array() > 1e-10).count(), spec.d_j[static_cast<std::size_t>(j)]);
    for (int o = j + 1; o < 3; ++o) {
      const Eigen::MatrixXd cross = data.features.middleCols(j * 20, 20).transpose() * data.features.middleCols(o * 20, 20);
      EXPECT_LT(cross.cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Subspaces, InfeasibleOrthogonalityIsRejected) {
  SubspaceSpec spec;
  spec.n = 10;
  spec.k = 3;
  spec.d_j = {4, 4, 4};
  EXPECT_THROW(gen_orthogonal_subspaces(spec), Error);
  spec.orthogonal = false;
  EXPECT_NO_THROW(gen_orthogonal_subspaces(spec));
}

TEST(Polar, ZeroImageGivesZeros) {
  EXPECT_TRUE(polar_resample(Eigen::MatrixXd::Zero(28, 28), 200, 15).isZero());
}

TEST(Polar, RadialImageGivesConstantRows) {
  // exact under the four-fold symmetry of a square grid
  const int n = 16;
  Eigen::MatrixXd img(n, n);
  const double c = (n - 1) / 2.0;
  for (int r = 0; r < n; ++r) {
    for (int s = 0; s < n; ++s) img(r, s) = std::exp(-((r - c) * (r - c) + (s - c) * (s - c)) / 20.0);
  }
  const Eigen::MatrixXd exact = polar_resample(img, 4, 6);
  for (int i = 0; i < 6; ++i) EXPECT_LT(exact.row(i).maxCoeff() - exact.row(i).minCoeff(), 1e-12);
  // finer angular grids are constant up to interpolation error
  const Eigen::MatrixXd fine = polar_resample(img, 200, 6);
  for (int i = 0; i < 5; ++i) EXPECT_LT(fine.row(i).maxCoeff() - fine.row(i).minCoeff(), 0.05);
}

TEST(Polar, QuarterTurnIsCyclicShift) {
  std::mt19937_64 gen(8);
  const int n = 12;
  const Eigen::MatrixXd img = random_matrix(gen, n, n);
  Eigen::MatrixXd rotated(n, n);
  for (int r = 0; r < n; ++r) {
    for (int s = 0; s < n; ++s) rotated(r, s) = img(n - 1 - s, r);
  }
  for (int gamma : {4, 8, 200}) {
    const Eigen::MatrixXd a = polar_resample(img, gamma, 5);
    const Eigen::MatrixXd b = polar_resample(rotated, gamma, 5);
    const int step = gamma / 4;
    for (int l = 0; l < gamma; ++l) {
      EXPECT_LT((b.col(l) - a.col((l - step + gamma) % gamma)).cwiseAbs().maxCoeff(), 1e-9) << gamma;
    }
  }
}

TEST(Polar, BatchLayout) {
  std::mt19937_64 gen(9);
  Tensor images({2, 10, 10});
  for (auto& v : images.data) v = std::uniform_real_distribution<double>(0, 1)(gen);
  const Tensor out = polar_resample_batch(images, 20, 3);
  EXPECT_EQ(out.shape, (std::vector<std::uint64_t>{2, 3, 20}));
  const Eigen::MatrixXd second = Eigen::Map<const RowMajorMatrix>(images.data.data() + 100, 10, 10);
  const Eigen::MatrixXd direct = polar_resample(second, 20, 3);
  EXPECT_EQ(out.data[60 + 1 * 20 + 7], direct(1, 7));
}

TEST(Translate, IdentityWrapAndGroupLaw) {
  std::mt19937_64 gen(10);
  const Eigen::MatrixXd img = random_matrix(gen, 5, 7);
  EXPECT_EQ(translate2d(img, 0, 0), img);
  EXPECT_EQ(translate2d(img, 5, 7), img);
  EXPECT_EQ(translate2d(img, -5, 14), img);
  for (int t = 0; t < 10; ++t) {
    const long p1 = t - 3, q1 = 2 * t - 9, p2 = 7 - t, q2 = t * t % 11;
    EXPECT_EQ(translate2d(translate2d(img, p2, q2), p1, q1), translate2d(img, p1 + p2, q1 + q2));
  }
  Eigen::MatrixXd moved = translate2d(img, 2, 3);
  EXPECT_EQ(moved(2, 3), img(0, 0));
  std::vector<double> a(img.data(), img.data() + img.size()), b(moved.data(), moved.data() + moved.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Augment, ShiftCounts) {
  EXPECT_EQ(augment_shifts(Tensor({1, 1, 200}), {3}, 10, ShiftKind::OneD).shifts_per_sample, 20u);
  EXPECT_EQ(augment_shifts(Tensor({1, 28, 28}), {3}, 7, ShiftKind::TwoD).shifts_per_sample, 16u);
  EXPECT_EQ(augment_shifts(Tensor({1, 28, 28}), {3}, 28, ShiftKind::TwoD).shifts_per_sample, 1u);
  EXPECT_THROW(augment_shifts(Tensor({1, 8}), {}, 0, ShiftKind::OneD), Error);
}

TEST(Augment, ShiftsMatchTranslations) {
  std::mt19937_64 gen(11);
  Tensor x({2, 2, 6, 6});
  for (auto& v : x.data) v = std::normal_distribution<double>()(gen);
  const AugmentedBatch aug = augment_shifts(x, {4, 9}, 3, ShiftKind::TwoD);
  ASSERT_EQ(aug.shifts_per_sample, 4u);
  EXPECT_EQ(aug.labels, (std::vector<int>{4, 4, 4, 4, 9, 9, 9, 9}));
  // sample 1, shift (3, 0), channel 1
  const Eigen::MatrixXd src = Eigen::Map<const RowMajorMatrix>(x.data.data() + (1 * 2 + 1) * 36, 6, 6);
  const Eigen::MatrixXd got = Eigen::Map<const RowMajorMatrix>(aug.samples.data.data() + ((4 + 2) * 2 + 1) * 36, 6, 6);
  EXPECT_EQ(got, translate2d(src, 3, 0));
  const AugmentedBatch one = augment_shifts(Tensor({1, 1, 5}, {1, 2, 3, 4, 5}), {0}, 2, ShiftKind::OneD);
  EXPECT_EQ(one.samples.data, (std::vector<double>{1, 2, 3, 4, 5, 4, 5, 1, 2, 3, 2, 3, 4, 5, 1}));
}

}  // namespace
}  // namespace redunet
