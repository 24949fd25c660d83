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


#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "stampfeat/whitening.hpp"

using namespace stampfeat;

namespace {

Eigen::MatrixXd uniform_samples(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

// Points placed so the sample covariance is exactly diag(2, 0.5).
Eigen::MatrixXd diagonal_toy() {
  Eigen::MatrixXd x(4, 2);
  const double a = std::sqrt(3.0), b = std::sqrt(0.75);
  x << a, 0, -a, 0, 0, b, 0, -b;
  return x;
}

}  // namespace

TEST(Zca, DiagonalCovarianceClosedForm) {
  const Eigen::MatrixXd x = diagonal_toy();
  ASSERT_NEAR(sample_cov(x)(0, 0), 2.0, 1e-14);
  ASSERT_NEAR(sample_cov(x)(1, 1), 0.5, 1e-14);
  const WhiteningTransform t = fit_zca(x, 1e-12);
  EXPECT_NEAR(t.matrix(0, 0), 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(t.matrix(1, 1), std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(t.matrix(0, 1), 0.0, 1e-12);
  const Eigen::VectorXd y = apply(t, Eigen::Vector2d(2.0, 1.0));
  EXPECT_NEAR(y[0], 2.0 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(y[1], std::sqrt(2.0), 1e-9);
}

TEST(Zca, WhiteDataGivesIdentity) {
  // Rows +-sqrt(n-1)/sqrt(2) e_i give covariance exactly I.
  const Eigen::Index d = 5;
  Eigen::MatrixXd x(2 * d, d);
  x.setZero();
  const double s = std::sqrt((2.0 * d - 1.0) / 2.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    x(2 * i, i) = s;
    x(2 * i + 1, i) = -s;
  }
  const WhiteningTransform t = fit_zca(x, 1e-12);
  EXPECT_LT((t.matrix - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Zca, TransformedCovarianceMatchesClosedForm) {
  // M C M = U diag(l / (l + eps)) U^T exactly, for any eps.
  const Eigen::MatrixXd x = uniform_samples(500, 256, 17);
  for (double eps : {1e-4, 1e-2}) {
    const WhiteningTransform t = fit_zca(x, eps);
    const Eigen::MatrixXd cov = sample_cov(apply_rows(t, x));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sample_cov(x));
    const Eigen::VectorXd l = eig.eigenvalues();
    const Eigen::VectorXd shrink = l.array() / (l.array() + eps);
    const Eigen::MatrixXd expected = eig.eigenvectors() * shrink.asDiagonal() * eig.eigenvectors().transpose();
    EXPECT_LT((cov - expected).cwiseAbs().maxCoeff(), 1e-8) << "eps " << eps;
    // Diagonal lies between the smallest and largest shrink factors.
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      EXPECT_GE(cov(i, i), shrink.minCoeff() - 1e-9);
      EXPECT_LE(cov(i, i), 1.0);
    }
  }
}

TEST(Zca, OffDiagonalsVanishWhenEpsIsSmallRelativeToSpectrum) {
  // eps <= 0.01 * min eigenvalue bounds every transformed entry to within
  // ~1% of the identity; shrinking eps further tightens the off-diagonals.
  const Eigen::MatrixXd x = uniform_samples(500, 64, 23);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sample_cov(x));
  const double lmin = eig.eigenvalues().minCoeff();
  {
    const Eigen::MatrixXd cov = sample_cov(apply_rows(fit_zca(x, 0.01 * lmin), x));
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      EXPECT_GE(cov(i, i), 0.9);
      EXPECT_LE(cov(i, i), 1.0);
    }
    EXPECT_LT((cov - Eigen::MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff(), 0.01);
  }
  {
    const Eigen::MatrixXd cov = sample_cov(apply_rows(fit_zca(x, 1e-8 * lmin), x));
    Eigen::MatrixXd off = cov;
    off.diagonal().setZero();
    EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Zca, SymmetricAndPermutationInvariant) {
  Eigen::MatrixXd x = uniform_samples(200, 16, 29);
  const WhiteningTransform a = fit_zca(x, 0.01);
  EXPECT_EQ(a.matrix, a.matrix.transpose());
  std::vector<Eigen::Index> perm(x.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y.row(i) = x.row(perm[i]);
  const WhiteningTransform b = fit_zca(y, 0.01);
  EXPECT_LT((a.matrix - b.matrix).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Zca, ApplyExamples) {
  std::vector<Patch> patches;
  for (std::uint64_t s = 0; s < 30; ++s) patches.push_back(oracle::random_patch(3, s, 0.0, 1.0));
  const WhiteningTransform t = fit_zca(patches, 0.01);
  Patch mean(3);
  for (std::size_t i = 0; i < 9; ++i) mean.data[i] = t.mean(i);
  for (double v : apply(t, mean).data) EXPECT_NEAR(v, 0.0, 1e-14);
  const Patch p = oracle::random_patch(3, 99);
  EXPECT_EQ(apply(WhiteningTransform::identity(9), p), p);
  EXPECT_THROW(apply(t, Patch(4)), InvalidInput);
}

TEST(Zca, Preconditions) {
  EXPECT_THROW(fit_zca(uniform_samples(1, 4, 1), 0.01), InvalidInput);
  Eigen::MatrixXd bad = uniform_samples(5, 4, 1);
  bad(2, 2) = std::nan("");
  EXPECT_THROW(fit_zca(bad, 0.01), InvalidInput);
  EXPECT_THROW(fit_zca(uniform_samples(5, 4, 1), 0.0), InvalidInput);
  std::vector<Patch> mixed{Patch(2), Patch(3)};
  EXPECT_THROW(fit_zca(mixed, 0.01), InvalidInput);
}

TEST(Zca, RankDeficientDataStaysFinite) {
  Eigen::MatrixXd x = uniform_samples(50, 6, 31);
  x.col(5) = x.col(4);  // one zero eigenvalue
  const WhiteningTransform t = fit_zca(x, 0.01);
  EXPECT_TRUE(t.matrix.allFinite());
}
