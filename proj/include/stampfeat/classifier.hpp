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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stampfeat/common.hpp"

namespace stampfeat {

inline constexpr int kStamp = +1;
inline constexpr int kNonStamp = -1;

/// Dense feature rows with +1 (stamp) / -1 (non-stamp) labels.
struct LabeledSet {
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.empty() ? 0 : x.front().size(); }
  void push(std::vector<double> row, int label) {
    x.push_back(std::move(row));
    y.push_back(label);
  }
  LabeledSet subset(std::span<const std::size_t> idx) const {
    LabeledSet s;
    for (std::size_t i : idx) s.push(x[i], y[i]);
    return s;
  }
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  bool stratified = true;
};

/// Seeded stratified split. Falls back to an unstratified shuffle (with a
/// warning) when a class has fewer than two members.
inline Split split(std::span<const int> labels, double train_fraction, std::uint64_t rng_seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "split: fraction must be in (0,1)");
  require(!labels.empty(), "split: empty set");
  Rng rng(rng_seed);
  Split s;

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? pos : neg).push_back(i);

  auto take = [&](std::vector<std::size_t> idx, bool keep_both_sides) {
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    if (keep_both_sides && idx.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + n_train);
    s.test.insert(s.test.end(), idx.begin() + n_train, idx.end());
  };

  const bool tiny_class = (!pos.empty() && pos.size() < 2) || (!neg.empty() && neg.size() < 2);
  if (tiny_class) {
    std::clog << "warning: split: a class has fewer than 2 members; falling back to unstratified split\n";
    s.stratified = false;
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    take(std::move(all), true);
  } else {
    take(std::move(pos), true);
    take(std::move(neg), true);
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c = 1.0;

  std::size_t dim() const { return weights.size(); }
};

struct Prediction {
  int label = kStamp;
  double margin = 0.0;
};

inline Prediction predict(const LinearModel& model, std::span<const double> x) {
  require(x.size() == model.weights.size(), "predict: feature dimension does not match model");
  double m = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i) m += model.weights[i] * x[i];
  return {m >= 0.0 ? kStamp : kNonStamp, m};
}

/// (1/2)|w|^2 + C * sum_i max(0, 1 - y_i (w.x_i + b)).
inline double svm_objective(const LinearModel& model, const LabeledSet& data) {
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  double hinge = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) hinge += std::max(0.0, 1.0 - data.y[i] * predict(model, data.x[i]).margin);
  return 0.5 * reg + model.c * hinge;
}

inline double hinge_loss(const LinearModel& model, const LabeledSet& data) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) hinge += std::max(0.0, 1.0 - data.y[i] * predict(model, data.x[i]).margin);
  return hinge;
}

inline constexpr double kDefaultSvmC = 1.0;
inline constexpr int kDefaultSvmEpochs = 100;

/// Primal objective at w = 0, b = 0 followed by one value per epoch.
struct SvmTrace {
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Primal solution recovered from dual variables.
inline LinearModel svm_primal(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha,
                              const Eigen::VectorXd& grad, double c) {
  const Eigen::VectorXd w = x.transpose() * alpha.cwiseProduct(y);
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double yg = y[i] * grad[i];
    if (alpha[i] >= c) {
      if (y[i] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[i] <= 0.0) {
      if (y[i] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      sum_free += yg;
      ++n_free;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  LinearModel m;
  m.weights.assign(w.data(), w.data() + w.size());
  m.bias = -rho;
  m.c = c;
  return m;
}

}  // namespace detail

/// Soft-margin linear SVM with an unregularized bias, solved in the dual by
/// sequential minimal optimization (maximal violating pair). The seed fixes
/// the visiting order, which decides ties between equally violating pairs.
/// `epochs` bounds the work at epochs * n pair updates.
inline LinearModel train_svm(const LabeledSet& train, double c = kDefaultSvmC, int epochs = kDefaultSvmEpochs,
                             std::uint64_t rng_seed = 0, SvmTrace* trace = nullptr) {
  require(train.size() >= 2, "train_svm: need at least 2 samples");
  require(c > 0.0, "train_svm: C must be positive");
  require(epochs >= 1, "train_svm: epochs must be >= 1");
  const bool has_pos = std::any_of(train.y.begin(), train.y.end(), [](int v) { return v > 0; });
  const bool has_neg = std::any_of(train.y.begin(), train.y.end(), [](int v) { return v < 0; });
  require(has_pos && has_neg, "train_svm: both classes must be present");

  const auto n = static_cast<Eigen::Index>(train.size());
  const auto d = static_cast<Eigen::Index>(train.dim());
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(rng_seed);
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = train.x[order[i]];
    require(static_cast<Eigen::Index>(row.size()) == d, "train_svm: ragged feature rows");
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), d);
    y[i] = train.y[order[i]] > 0 ? 1.0 : -1.0;
  }
  require(x.allFinite(), "train_svm: non-finite features");

  const Eigen::MatrixXd gram = x * x.transpose();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - 1
  constexpr double kTol = 1e-8;
  constexpr double kTinyCurvature = 1e-12;

  auto objective_now = [&] {
    LinearModel m = detail::svm_primal(x, y, alpha, grad, c);
    double reg = 0.0;
    for (double w : m.weights) reg += w * w;
    const Eigen::VectorXd margins = (x * Eigen::Map<const Eigen::VectorXd>(m.weights.data(), d)).array() + m.bias;
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) hinge += std::max(0.0, 1.0 - y[i] * margins[i]);
    return 0.5 * reg + c * hinge;
  };
  if (trace) trace->objective.push_back(c * static_cast<double>(n));

  const long max_iter = static_cast<long>(epochs) * n;
  long iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    Eigen::Index i = -1, j = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      const bool up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
      const bool low = (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0);
      if (up && v > g_max) { g_max = v; i = t; }
      if (low && v < g_min) { g_min = v; j = t; }
    }
    if (i < 0 || j < 0 || g_max - g_min < kTol) {
      converged = true;
      break;
    }

    // Curvature along the pair direction is |x_i - x_j|^2 for either label mix.
    double quad = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
    if (quad <= 0.0) quad = kTinyCurvature;
    const double old_ai = alpha[i], old_aj = alpha[j];
    double ai = old_ai, aj = old_aj;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > c) { ai = c; aj = c - diff; }
      } else if (aj > c) {
        aj = c;
        ai = c + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c) {
        if (ai > c) { ai = c; aj = sum - c; }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > c) {
        if (aj > c) { aj = c; ai = sum - c; }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double dai = ai - old_ai, daj = aj - old_aj;
    // Q_tk = y_t y_k K_tk
    grad += (y.array() * gram.col(i).array() * (y[i] * dai) + y.array() * gram.col(j).array() * (y[j] * daj)).matrix();

    if (trace && (iter + 1) % n == 0) trace->objective.push_back(objective_now());
  }

  LinearModel model = detail::svm_primal(x, y, alpha, grad, c);
  if (trace) {
    trace->objective.push_back(objective_now());
    trace->iterations = static_cast<int>(iter);
    trace->converged = converged;
  }
  return model;
}

struct EvalReport {
  double accuracy = 0.0;   // percent
  double precision = 0.0;  // percent; 100 when nothing is predicted positive
  double recall = 0.0;     // percent
  double test_time_seconds = 0.0;
  std::size_t n_test = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline EvalReport report_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  r.n_test = tp + fp + tn + fn;
  r.accuracy = r.n_test ? 100.0 * static_cast<double>(tp + tn) / static_cast<double>(r.n_test) : 0.0;
  r.precision = (tp + fp) ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp) : 100.0;
  r.recall = (tp + fn) ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : 100.0;
  return r;
}

/// Scores the whole test set; test_time_seconds covers scoring only.
inline EvalReport evaluate(const LinearModel& model, const LabeledSet& test) {
  require(test.size() > 0, "evaluate: empty test set");
  std::vector<int> pred(test.size());
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < test.size(); ++i) pred[i] = predict(model, test.x[i]).label;
  const auto t1 = std::chrono::steady_clock::now();
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const bool truth = test.y[i] > 0;
    const bool guess = pred[i] > 0;
    if (truth && guess) ++tp;
    else if (!truth && guess) ++fp;
    else if (!truth) ++tn;
    else ++fn;
  }
  EvalReport r = report_from_counts(tp, fp, tn, fn);
  r.test_time_seconds = std::chrono::duration<double>(t1 - t0).count();
  return r;
}

}  // namespace stampfeat
