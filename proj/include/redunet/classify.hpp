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
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "redunet/error.hpp"
#include "redunet/rate.hpp"
#include "redunet/tensor.hpp"

namespace redunet {

/// Per-class affine subspace: mean plus orthonormal principal directions.
struct SubspaceClassifier {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> bases;  // n x r_j, r_j may be zero

  Eigen::Index classes() const { return static_cast<Eigen::Index>(means.size()); }
  Eigen::Index dim() const { return means.empty() ? 0 : means.front().size(); }
  Eigen::Index rank(Eigen::Index j) const { return bases[static_cast<std::size_t>(j)].cols(); }
};

inline constexpr int kDefaultComponents = 30;

/// Fits one subspace per class from hard labels: the class mean and the top
/// left singular vectors of the centred class block. Each class keeps
/// min(r, numerical rank) components, the rank counting singular values
/// above 1e-10 of the largest.
inline SubspaceClassifier fit_nsc(const FeatureMatrix& z, const std::vector<int>& labels, int r,
                                  int classes = -1) {
  require(static_cast<Eigen::Index>(labels.size()) == z.cols(), ErrorKind::Shape, "label count != sample count");
  require(r >= 1 && r <= z.rows(), ErrorKind::InvalidArgument,
          "component count " + std::to_string(r) + " must lie in [1, " + std::to_string(z.rows()) + "]");
  int k = classes;
  if (k < 0) {
    k = 0;
    for (int l : labels) k = std::max(k, l + 1);
  }
  SubspaceClassifier clf;
  for (int j = 0; j < k; ++j) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == j) idx.push_back(static_cast<Eigen::Index>(i));
    }
    require(!idx.empty(), ErrorKind::EmptyClass, "class " + std::to_string(j) + " has no samples");
    Eigen::MatrixXd block(z.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = z.col(idx[c]);
    const Eigen::VectorXd mean = block.rowwise().mean();
    block.colwise() -= mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::Index rank = 0;
    if (sv.size() > 0 && sv(0) > 0) rank = (sv.array() > 1e-10 * sv(0)).count();
    const Eigen::Index keep = std::min<Eigen::Index>(r, rank);
    clf.means.push_back(mean);
    clf.bases.push_back(svd.matrixU().leftCols(keep));
  }
  return clf;
}

inline SubspaceClassifier fit_nsc(const FeatureMatrix& z, const Membership& pi, int r) {
  return fit_nsc(z, pi.labels(), r, static_cast<int>(pi.classes()));
}

/// Squared residual of x against every class subspace.
inline Eigen::VectorXd nsc_residuals(const SubspaceClassifier& clf, const Eigen::VectorXd& x) {
  require(x.size() == clf.dim(), ErrorKind::Shape, "feature dimension does not match classifier");
  Eigen::VectorXd res(clf.classes());
  for (Eigen::Index j = 0; j < clf.classes(); ++j) {
    const Eigen::VectorXd d = x - clf.means[static_cast<std::size_t>(j)];
    const auto& u = clf.bases[static_cast<std::size_t>(j)];
    res(j) = (d - u * (u.transpose() * d)).squaredNorm();
  }
  return res;
}

/// argmin_j ||(I - U_j U_j^T)(x - mu_j)||^2, smallest index on ties.
inline int predict_nsc(const SubspaceClassifier& clf, const Eigen::VectorXd& x) {
  const Eigen::VectorXd res = nsc_residuals(clf, x);
  int best = 0;
  for (Eigen::Index j = 1; j < res.size(); ++j) {
    if (res(j) < res(best)) best = static_cast<int>(j);
  }
  return best;
}

/// Column-wise prediction for a batch of features.
inline std::vector<int> predict_nsc_batch(const SubspaceClassifier& clf, const FeatureMatrix& x) {
  require(x.rows() == clf.dim(), ErrorKind::Shape, "feature dimension does not match classifier");
  Eigen::MatrixXd res(clf.classes(), x.cols());
  for (Eigen::Index j = 0; j < clf.classes(); ++j) {
    Eigen::MatrixXd d = x.colwise() - clf.means[static_cast<std::size_t>(j)];
    const auto& u = clf.bases[static_cast<std::size_t>(j)];
    if (u.cols() > 0) d -= u * (u.transpose() * d);
    res.row(j) = d.colwise().squaredNorm();
  }
  std::vector<int> out(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < res.rows(); ++j) {
      if (res(j, i) < res(best, i)) best = static_cast<int>(j);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  require(predicted.size() == truth.size() && !truth.empty(), ErrorKind::Shape, "accuracy needs equal, non-empty lists");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// G(i, j) = <z_i, z_j> / (||z_i|| ||z_j||), clamped to [-1, 1].
inline Eigen::MatrixXd cosine_similarity_matrix(const FeatureMatrix& z) {
  const FeatureMatrix zn = normalize_columns(z);
  Eigen::MatrixXd g = zn.transpose() * zn;
  return g.cwiseMax(-1.0).cwiseMin(1.0);
}

/// Writes means.rtf (n x k), basis_<j>.rtf (n x r_j) and manifest.txt.
inline void save_classifier(const std::filesystem::path& dir, const SubspaceClassifier& clf, int requested_r) {
  std::filesystem::create_directories(dir);
  Eigen::MatrixXd means(clf.dim(), clf.classes());
  for (Eigen::Index j = 0; j < clf.classes(); ++j) means.col(j) = clf.means[static_cast<std::size_t>(j)];
  write_tensor(dir / "means.rtf", from_matrix(means));
  for (Eigen::Index j = 0; j < clf.classes(); ++j) {
    write_tensor(dir / ("basis_" + std::to_string(j) + ".rtf"), from_matrix(clf.bases[static_cast<std::size_t>(j)]));
  }
  std::ofstream manifest(dir / "manifest.txt");
  manifest << "classes " << clf.classes() << "\n";
  manifest << "components " << requested_r << "\n";
  manifest << "ranks";
  for (Eigen::Index j = 0; j < clf.classes(); ++j) manifest << ' ' << clf.rank(j);
  manifest << "\n";
  require(manifest.good(), ErrorKind::Io, "cannot write " + (dir / "manifest.txt").string());
}

inline SubspaceClassifier load_classifier(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  require(manifest.good(), ErrorKind::Io, "cannot read " + (dir / "manifest.txt").string());
  std::string key;
  long classes = -1;
  while (manifest >> key) {
    if (key == "classes") manifest >> classes;
  }
  require(classes >= 1, ErrorKind::Format, "manifest lacks a class count");
  const Eigen::MatrixXd means = to_matrix(read_tensor(dir / "means.rtf"));
  require(means.cols() == classes, ErrorKind::Shape, "means do not match manifest class count");
  SubspaceClassifier clf;
  for (long j = 0; j < classes; ++j) {
    clf.means.push_back(means.col(j));
    clf.bases.push_back(to_matrix(read_tensor(dir / ("basis_" + std::to_string(j) + ".rtf"))));
    require(clf.bases.back().rows() == means.rows(), ErrorKind::Shape, "basis dimension mismatch");
  }
  return clf;
}

}  // namespace redunet
