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

#include <random>

#include <gtest/gtest.h>

#include "redunet/dft.hpp"
#include "test_util.hpp"

namespace redunet {
namespace {

using testing::random_matrix;

TEST(Dft, ConstantVector) {
  const Eigen::VectorXcd x = dft_1d(Eigen::VectorXd(Eigen::VectorXd::Ones(4)));
  EXPECT_NEAR(std::abs(x(0) - cplx(2.0, 0.0)), 0.0, 1e-15);
  for (int p = 1; p < 4; ++p) EXPECT_NEAR(std::abs(x(p)), 0.0, 1e-15);
}

TEST(Dft, Impulse) {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(4);
  delta(0) = 1.0;
  const Eigen::VectorXcd x = dft_1d(delta);
  for (int p = 0; p < 4; ++p) EXPECT_NEAR(std::abs(x(p) - cplx(0.5, 0.0)), 0.0, 1e-15);
}

TEST(Dft, ParsevalAndInverse) {
  std::mt19937_64 gen(1);
  for (int t : {1, 2, 3, 7, 8, 28, 200}) {
    const Eigen::VectorXd x = random_matrix(gen, t, 1).col(0);
    const Eigen::VectorXcd f = dft_1d(x);
    EXPECT_NEAR(f.norm(), x.norm(), 1e-12 * std::max(1.0, x.norm()));
    EXPECT_LT((idft_1d(f).real() - x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(idft_1d(f).imag().cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Dft, MatchesDefinition) {
  std::mt19937_64 gen(2);
  const int t = 6;
  const Eigen::VectorXd x = random_matrix(gen, t, 1).col(0);
  const Eigen::VectorXcd f = dft_1d(x);
  for (int p = 0; p < t; ++p) {
    cplx acc = 0;
    for (int s = 0; s < t; ++s) acc += x(s) * std::polar(1.0, -2.0 * std::numbers::pi * p * s / t);
    EXPECT_NEAR(std::abs(f(p) - acc / std::sqrt(double(t))), 0.0, 1e-12);
  }
}

TEST(Circulant, ImpulseIsIdentityAndUnitShift) {
  EXPECT_EQ(circulant(Eigen::Vector3d(1, 0, 0)), Eigen::Matrix3d::Identity());
  const Eigen::Vector3d x(1, 2, 3);
  const Eigen::Vector3d shifted = circulant(Eigen::Vector3d(0, 1, 0)) * x;
  EXPECT_EQ(shifted, Eigen::Vector3d(3, 1, 2));
}

TEST(Circulant, ConvolutionTheoremFixesScale) {
  std::mt19937_64 gen(3);
  const int t = 8;
  const Eigen::VectorXd z = random_matrix(gen, t, 1).col(0), x = random_matrix(gen, t, 1).col(0);
  const Eigen::VectorXcd product = dft_1d(z).cwiseProduct(dft_1d(x));
  const Eigen::VectorXcd conv = std::sqrt(double(t)) * idft_1d(product);
  EXPECT_LT((circulant(z) * x - conv.real()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Circulant, DiagonalizedWithRootTScaledSpectrum) {
  std::mt19937_64 gen(4);
  const int t = 5;
  const Eigen::VectorXd z = random_matrix(gen, t, 1).col(0);
  Eigen::MatrixXcd f(t, t);
  for (int s = 0; s < t; ++s) f.col(s) = dft_1d(Eigen::VectorXd(Eigen::VectorXd::Unit(t, s)));
  const Eigen::MatrixXcd diag = f * circulant(z).cast<cplx>() * f.adjoint();
  const Eigen::VectorXcd want = std::sqrt(double(t)) * dft_1d(z);
  EXPECT_LT((diag - Eigen::MatrixXcd(want.asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Circulant2d, ColumnsAreTranslations) {
  Eigen::MatrixXd img(2, 3);
  img << 1, 2, 3, 4, 5, 6;
  const Eigen::MatrixXd c = circulant_2d(img);
  // column (1, 2): one row down, two columns right
  const Eigen::VectorXd col = c.col(1 * 3 + 2);
  Eigen::MatrixXd moved(2, 3);
  moved << 5, 6, 4, 2, 3, 1;
  for (int r = 0; r < 2; ++r) {
    for (int s = 0; s < 3; ++s) EXPECT_EQ(col(r * 3 + s), moved(r, s));
  }
}

TEST(Dft2d, SeparableTransformIsUnitaryAndDiagonalizes) {
  std::mt19937_64 gen(5);
  const int h = 3, w = 4;
  const Eigen::MatrixXd img = random_matrix(gen, h, w);
  UnitaryDft2d dft(h, w);
  Eigen::MatrixXcd f(h * w, h * w);
  std::vector<cplx> e(h * w), out(h * w);
  for (int t = 0; t < h * w; ++t) {
    std::fill(e.begin(), e.end(), cplx{});
    e[t] = 1.0;
    dft.forward(e, out);
    for (int p = 0; p < h * w; ++p) f(p, t) = out[p];
  }
  EXPECT_LT((f * f.adjoint() - Eigen::MatrixXcd::Identity(h * w, h * w)).cwiseAbs().maxCoeff(), 1e-12);
  std::vector<cplx> flat(h * w), spec(h * w);
  for (int r = 0; r < h; ++r) {
    for (int s = 0; s < w; ++s) flat[r * w + s] = img(r, s);
  }
  dft.forward(flat, spec);
  const Eigen::MatrixXcd diag = f * circulant_2d(img).cast<cplx>() * f.adjoint();
  for (int p = 0; p < h * w; ++p) {
    EXPECT_NEAR(std::abs(diag(p, p) - std::sqrt(double(h * w)) * spec[p]), 0.0, 1e-12);
  }
  EXPECT_LT((diag - Eigen::MatrixXcd(diag.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dft, LengthMismatchIsShapeError) {
  UnitaryDft dft(4);
  std::vector<cplx> a(3), b(4);
  EXPECT_THROW(dft.forward(a, b), Error);
}

}  // namespace
}  // namespace redunet
