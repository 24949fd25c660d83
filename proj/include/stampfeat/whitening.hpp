// Copyright 2026 The stampfeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stampfeat/imaging.hpp"

namespace stampfeat {

/// ZCA whitening: x -> M (x - mean), M = U (L + eps I)^(-1/2) U^T.
struct WhiteningTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd matrix;
  double epsilon = 0.01;

  Eigen::Index dim() const { return mean.size(); }

  static WhiteningTransform identity(Eigen::Index dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim), 1.0};
  }
};

inline constexpr double kDefaultZcaEpsilon = 0.01;

/// Rows of `samples` are observations.
inline WhiteningTransform fit_zca(const Eigen::MatrixXd& samples, double epsilon = kDefaultZcaEpsilon) {
  require(samples.rows() >= 2, "fit_zca: need at least 2 samples");
  require(samples.cols() >= 1, "fit_zca: zero-dimensional samples");
  require(epsilon > 0.0, "fit_zca: epsilon must be positive");
  require(samples.allFinite(), "fit_zca: non-finite sample values");

  WhiteningTransform t;
  t.epsilon = epsilon;
  t.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - t.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(samples.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw InvalidInput("fit_zca: eigendecomposition failed");
  Eigen::VectorXd scale = eig.eigenvalues();
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    const double lambda = scale[i] < 1e-12 ? 0.0 : scale[i];
    scale[i] = 1.0 / std::sqrt(lambda + epsilon);
  }
  const Eigen::MatrixXd& u = eig.eigenvectors();
  t.matrix = u * scale.asDiagonal() * u.transpose();
  // Symmetrize away rounding so M == M^T holds exactly.
  t.matrix = 0.5 * (t.matrix + t.matrix.transpose()).eval();
  return t;
}

/// Stack patches as rows of a sample matrix.
inline Eigen::MatrixXd patch_matrix(std::span<const Patch> patches) {
  require(!patches.empty(), "patch_matrix: no patches");
  const std::size_t d = patches.front().data.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(patches.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < patches.size(); ++i) {
    require(patches[i].data.size() == d && patches[i].side == patches.front().side,
            "patch_matrix: patches must share one side length");
    x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(patches[i].data.data(), d);
  }
  return x;
}

inline WhiteningTransform fit_zca(std::span<const Patch> patches, double epsilon = kDefaultZcaEpsilon) {
  require(patches.size() >= 2, "fit_zca: need at least 2 patches");
  return fit_zca(patch_matrix(patches), epsilon);
}

inline Eigen::VectorXd apply(const WhiteningTransform& t, const Eigen::VectorXd& x) {
  require(x.size() == t.dim(), "apply: dimension mismatch");
  return t.matrix * (x - t.mean);
}

inline Patch apply(const WhiteningTransform& t, const Patch& patch) {
  require(static_cast<Eigen::Index>(patch.data.size()) == t.dim(), "apply: patch does not match transform dimension");
  const Eigen::Map<const Eigen::VectorXd> x(patch.data.data(), t.dim());
  Eigen::VectorXd y = t.matrix * (x - t.mean);
  return Patch(patch.side, std::vector<double>(y.data(), y.data() + y.size()));
}

/// Whiten every row of a sample matrix.
inline Eigen::MatrixXd apply_rows(const WhiteningTransform& t, const Eigen::MatrixXd& samples) {
  require(samples.cols() == t.dim(), "apply_rows: dimension mismatch");
  // (x - mu)^T M^T == (x - mu)^T M for symmetric M
  return (samples.rowwise() - t.mean.transpose()) * t.matrix.transpose();
}

}  // namespace stampfeat
