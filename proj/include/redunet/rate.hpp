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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "redunet/error.hpp"

namespace redunet {

/// n x m, one feature vector per column.
using FeatureMatrix = Eigen::MatrixXd;

/// Class-assignment weights: row j holds the diagonal of the j-th membership
/// matrix. Columns sum to one; soft weights are allowed.
struct Membership {
  Eigen::MatrixXd weights;  // k x m
  Eigen::VectorXd class_sizes;

  Eigen::Index classes() const { return weights.rows(); }
  Eigen::Index samples() const { return weights.cols(); }

  static Membership from_labels(const std::vector<int>& labels, int k) {
    require(k >= 1, ErrorKind::InvalidArgument, "class count must be >= 1");
    Membership pi;
    pi.weights = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      require(labels[i] >= 0 && labels[i] < k, ErrorKind::InvalidArgument,
              "label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(k) + ")");
      pi.weights(labels[i], static_cast<Eigen::Index>(i)) = 1.0;
    }
    pi.class_sizes = pi.weights.rowwise().sum();
    return pi;
  }

  /// Infers k as max(label) + 1.
  static Membership from_labels(const std::vector<int>& labels) {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    return from_labels(labels, std::max(k, 1));
  }

  static Membership from_weights(Eigen::MatrixXd w) {
    Membership pi;
    pi.weights = std::move(w);
    pi.class_sizes = pi.weights.rowwise().sum();
    pi.validate();
    return pi;
  }

  /// Hard label of every column (argmax, smallest index on ties).
  std::vector<int> labels() const {
    std::vector<int> out(static_cast<std::size_t>(samples()));
    for (Eigen::Index i = 0; i < samples(); ++i) {
      Eigen::Index j;
      weights.col(i).maxCoeff(&j);
      out[static_cast<std::size_t>(i)] = static_cast<int>(j);
    }
    return out;
  }

  void validate(double tol = 1e-9) const {
    require(weights.rows() >= 1 && weights.cols() >= 1, ErrorKind::Shape, "membership must be non-empty");
    require((weights.array() >= 0.0).all() && (weights.array() <= 1.0).all(), ErrorKind::InvalidArgument,
            "membership weights must lie in [0, 1]");
    for (Eigen::Index i = 0; i < weights.cols(); ++i) {
      const double s = weights.col(i).sum();
      require(std::abs(s - 1.0) <= tol, ErrorKind::InvalidArgument,
              "membership column " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }
};

/// Precision and the coefficients derived from it for a given feature
/// dimension and membership.
struct RateParams {
  double eps = 0.0;
  double alpha = 0.0;
  Eigen::VectorXd alpha_j;  // zero for empty classes
  Eigen::VectorXd gamma_j;

  /// `dim` is the per-sample dimension n in alpha = n / (m eps^2); the
  /// invariant networks pass the channel count here.
  static RateParams make(Eigen::Index dim, const Membership& pi, double eps) {
    require(eps > 0 && std::isfinite(eps), ErrorKind::InvalidArgument, "eps must be positive");
    const double m = static_cast<double>(pi.samples());
    const double n = static_cast<double>(dim);
    RateParams p;
    p.eps = eps;
    p.alpha = n / (m * eps * eps);
    p.alpha_j.resize(pi.classes());
    p.gamma_j.resize(pi.classes());
    for (Eigen::Index j = 0; j < pi.classes(); ++j) {
      const double mj = pi.class_sizes(j);
      p.alpha_j(j) = mj > 0 ? n / (mj * eps * eps) : 0.0;
      p.gamma_j(j) = mj / m;
    }
    return p;
  }
};

struct Rates {
  double R = 0.0;
  double Rc = 0.0;
  double dR = 0.0;
};

namespace detail {

inline void require_finite(const Eigen::MatrixXd& z, const char* what) {
  require(z.allFinite(), ErrorKind::Numeric, std::string(what) + " contains non-finite entries");
}

/// log det of a symmetric positive-definite matrix via Cholesky.
template <typename Derived>
double logdet_spd(const Eigen::MatrixBase<Derived>& a) {
  Eigen::LLT<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(a);
  require(llt.info() == Eigen::Success, ErrorKind::Numeric, "log-det argument is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
}

/// log det(I + scale * Y Y^T), formed on whichever side is smaller.
inline double logdet_identity_plus(const Eigen::MatrixXd& y, double scale) {
  const Eigen::Index side = std::min(y.rows(), y.cols());
  if (side == 0) return 0.0;
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(side, side);
  if (y.cols() < y.rows()) {
    g.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose(), scale);
  } else {
    g.selfadjointView<Eigen::Lower>().rankUpdate(y, scale);
  }
  return logdet_spd(g.selfadjointView<Eigen::Lower>().toDenseMatrix());
}

/// Columns of Z with non-zero weight in class j, scaled by sqrt(weight), so
/// that Y Y^T = Z Pi^j Z^T.
inline Eigen::MatrixXd weighted_columns(const FeatureMatrix& z, const Membership& pi, Eigen::Index j) {
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) count += pi.weights(j, i) > 0 ? 1 : 0;
  Eigen::MatrixXd y(z.rows(), count);
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double w = pi.weights(j, i);
    if (w > 0) y.col(c++) = std::sqrt(w) * z.col(i);
  }
  return y;
}

inline void check_membership(const FeatureMatrix& z, const Membership& pi) {
  require(pi.samples() == z.cols(), ErrorKind::Shape,
          "membership covers " + std::to_string(pi.samples()) + " samples, features have " +
              std::to_string(z.cols()));
  pi.validate();
}

/// alpha (I + alpha Y Y^T)^{-1}, symmetrized.
inline Eigen::MatrixXd scaled_resolvent(const Eigen::MatrixXd& y, double alpha) {
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  a.selfadjointView<Eigen::Lower>().rankUpdate(y, alpha);
  Eigen::LLT<Eigen::MatrixXd> llt(a.selfadjointView<Eigen::Lower>());
  require(llt.info() == Eigen::Success, ErrorKind::Numeric, "operator inversion failed");
  Eigen::MatrixXd out = alpha * llt.solve(Eigen::MatrixXd::Identity(n, n));
  return 0.5 * (out + out.transpose());
}

}  // namespace detail

/// R(Z, eps) = 1/2 log det(I + n/(m eps^2) Z Z^T).
inline double coding_rate(const FeatureMatrix& z, double eps) {
  require(eps > 0, ErrorKind::InvalidArgument, "eps must be positive");
  require(z.rows() >= 1 && z.cols() >= 1, ErrorKind::Shape, "feature matrix must be non-empty");
  detail::require_finite(z, "feature matrix");
  const double alpha = static_cast<double>(z.rows()) / (static_cast<double>(z.cols()) * eps * eps);
  return 0.5 * detail::logdet_identity_plus(z, alpha);
}

/// R_c(Z, eps | Pi) = sum_j m_j/(2m) log det(I + n/(m_j eps^2) Z Pi^j Z^T).
/// Empty classes contribute zero. Terms are summed in class order.
inline double coding_rate_partitioned(const FeatureMatrix& z, const Membership& pi, double eps) {
  require(eps > 0, ErrorKind::InvalidArgument, "eps must be positive");
  detail::require_finite(z, "feature matrix");
  detail::check_membership(z, pi);
  const double n = static_cast<double>(z.rows());
  const double m = static_cast<double>(z.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < pi.classes(); ++j) {
    const double mj = pi.class_sizes(j);
    if (mj <= 0) continue;
    const double alpha_j = n / (mj * eps * eps);
    total += mj / (2.0 * m) * detail::logdet_identity_plus(detail::weighted_columns(z, pi, j), alpha_j);
  }
  return total;
}

inline Rates rate_reduction(const FeatureMatrix& z, const Membership& pi, double eps) {
  Rates r;
  r.R = coding_rate(z, eps);
  r.Rc = coding_rate_partitioned(z, pi, eps);
  r.dR = r.R - r.Rc;
  return r;
}

/// E = alpha (I + alpha Z Z^T)^{-1}; E Z is the gradient of R.
inline Eigen::MatrixXd expansion_operator(const FeatureMatrix& z, const RateParams& params) {
  detail::require_finite(z, "feature matrix");
  require(params.alpha > 0, ErrorKind::InvalidArgument, "alpha must be positive");
  return detail::scaled_resolvent(z, params.alpha);
}

/// C^j = alpha_j (I + alpha_j Z Pi^j Z^T)^{-1}.
inline Eigen::MatrixXd compression_operator(const FeatureMatrix& z, const Membership& pi, Eigen::Index j,
                                            const RateParams& params) {
  detail::require_finite(z, "feature matrix");
  detail::check_membership(z, pi);
  require(j >= 0 && j < pi.classes(), ErrorKind::InvalidArgument, "class index out of range");
  require(pi.class_sizes(j) > 0, ErrorKind::EmptyClass, "class " + std::to_string(j) + " has no samples");
  return detail::scaled_resolvent(detail::weighted_columns(z, pi, j), params.alpha_j(j));
}

/// dDeltaR/dZ = E Z - sum_j gamma_j C^j Z Pi^j.
inline Eigen::MatrixXd rate_gradient(const FeatureMatrix& z, const Membership& pi, const RateParams& params) {
  Eigen::MatrixXd g = expansion_operator(z, params) * z;
  for (Eigen::Index j = 0; j < pi.classes(); ++j) {
    if (pi.class_sizes(j) <= 0) continue;
    const Eigen::MatrixXd cz = compression_operator(z, pi, j, params) * z;
    g -= params.gamma_j(j) * cz * pi.weights.row(j).asDiagonal();
  }
  return g;
}

/// Scales every column to unit 2-norm.
inline FeatureMatrix normalize_columns(FeatureMatrix z) {
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double norm = z.col(i).norm();
    require(norm > 0, ErrorKind::Numeric, "column " + std::to_string(i) + " has zero norm");
    z.col(i) /= norm;
  }
  return z;
}

}  // namespace redunet
