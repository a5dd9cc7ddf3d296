/* Copyright 2026 The qnscd Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef QNSCD_LOSS_HPP_
#define QNSCD_LOSS_HPP_

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "qnscd/pqc.hpp"
#include "qnscd/simcore.hpp"

namespace qnscd {

struct LabeledSample {
  StateVector state;
  int label;  // +1 or -1
};

using Batch = std::vector<LabeledSample>;

/// Tabulated loss l(y, y_hat) >= 0 over integer labels.
class LossFunction {
 public:
  static LossFunction zero_one() {
    LossFunction f;
    f.zero_one_ = true;
    return f;
  }

  /// Same value for every (y, y_hat).
  static LossFunction constant(double k) {
    if (k < 0.0) throw Error("LossFunction: negative loss");
    LossFunction f;
    f.default_ = k;
    return f;
  }

  static LossFunction table(std::map<std::pair<int, int>, double> entries) {
    for (const auto& [key, v] : entries) {
      if (v < 0.0) throw Error("LossFunction: negative loss");
    }
    LossFunction f;
    f.table_ = std::move(entries);
    return f;
  }

  double operator()(int y, int y_hat) const {
    if (zero_one_) return y == y_hat ? 0.0 : 1.0;
    const auto it = table_.find({y, y_hat});
    return it == table_.end() ? default_ : it->second;
  }

  bool is_zero_one() const { return zero_one_; }

 private:
  LossFunction() = default;
  bool zero_one_ = false;
  double default_ = 0.0;
  std::map<std::pair<int, int>, double> table_;
};

/// E[l(y, Y_hat)] = sum_yhat l(y, yhat) Tr{Lambda_yhat U Phi U^dag}.
inline double per_sample_expected_loss(const LayeredCircuit& circuit,
                                       std::span<const double> theta,
                                       const Povm& povm,
                                       const LabeledSample& sample,
                                       const LossFunction& loss) {
  const StateVector out = forward_copy(circuit, theta, sample.state);
  const auto probs = povm.probabilities(out);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += loss(sample.label, povm.elements()[k].label) * probs[k];
  }
  return acc;
}

inline double average_expected_loss(const LayeredCircuit& circuit,
                                    std::span<const double> theta,
                                    const Povm& povm, const Batch& batch,
                                    const LossFunction& loss) {
  if (batch.empty()) throw Error("average_expected_loss: empty batch");
  double acc = 0.0;
  for (const auto& s : batch) {
    acc += per_sample_expected_loss(circuit, theta, povm, s, loss);
  }
  return acc / static_cast<double>(batch.size());
}

/// Fraction of single-shot misclassifications over the batch.
inline double empirical_loss(const LayeredCircuit& circuit,
                             std::span<const double> theta, const Povm& povm,
                             const Batch& batch, Rng& rng) {
  if (batch.empty()) throw Error("empirical_loss: empty batch");
  std::size_t wrong = 0;
  for (const auto& s : batch) {
    const StateVector out = forward_copy(circuit, theta, s.state);
    if (measure_povm(out, povm, rng) != s.label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(batch.size());
}

/// (1/N) sum_j y_j |phi_j><phi_j|.
inline Matrix signed_mean_operator(const Batch& batch) {
  if (batch.empty()) throw Error("signed_mean_operator: empty batch");
  const auto dim = static_cast<Eigen::Index>(batch.front().state.dim());
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& s : batch) {
    if (s.label != 1 && s.label != -1) throw Error("labels must be +-1");
    const Eigen::VectorXcd v = s.state.to_eigen();
    m.noalias() += static_cast<double>(s.label) * (v * v.adjoint());
  }
  return m / static_cast<double>(batch.size());
}

/// Holevo-Helstrom minimum zero-one loss: (1 - ||signed mean||_1) / 2.
inline double optimal_expected_loss(const Batch& batch) {
  const Matrix m = signed_mean_operator(batch);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()),
                                           Eigen::EigenvaluesOnly);
  return 0.5 * (1.0 - es.eigenvalues().cwiseAbs().sum());
}

}  // namespace qnscd

#endif  // QNSCD_LOSS_HPP_
