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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qnscd/dataset.hpp"
#include "qnscd/gradient.hpp"
#include "oracles.hpp"

namespace qnscd {
namespace {

using oracle::DenseOracle;
using oracle::kI;
using oracle::Kron;

// Zero-one expected loss of one sample from dense matrices.
double DenseLoss(const LayeredCircuit& c, std::span<const double> theta, const Povm& povm,
                 const LabeledSample& s) {
  const Eigen::VectorXcd out = DenseOracle(c, theta) * s.state.to_eigen();
  double acc = 0.0;
  for (const auto& e : povm.elements()) {
    if (e.label != s.label) acc += out.dot(e.op * out).real();
  }
  return acc;
}

RealVector DenseGradient(const LayeredCircuit& c, std::span<const double> theta,
                         const Povm& povm, const LabeledSample& s) {
  const double h = 1e-5;
  RealVector g(c.num_params());
  std::vector<double> w(theta.begin(), theta.end());
  for (int k = 0; k < c.num_params(); ++k) {
    w[k] = theta[k] + h;
    const double p = DenseLoss(c, w, povm, s);
    w[k] = theta[k] - h;
    const double m = DenseLoss(c, w, povm, s);
    w[k] = theta[k];
    g(k) = (p - m) / (2 * h);
  }
  return g;
}

TEST(ExactGradientTest, MatchesDenseFiniteDifferences) {
  Rng rng(1);
  const LossFunction loss = LossFunction::zero_one();
  for (const auto& name : {"Q3L3", "Q4L4"}) {
    const LayeredCircuit c = builtin_circuit(name);
    const Povm povm = parity_povm(c.num_qubits());
    const ParamVector theta = random_params(c, rng);
    const LabeledSample s = generate_sample(c.num_qubits(), rng);
    const RealVector g = exact_per_sample_gradient(c, theta, povm, s, loss);
    EXPECT_LT((g - DenseGradient(c, theta, povm, s)).cwiseAbs().maxCoeff(), 1e-8) << name;
  }
}

TEST(ExactGradientTest, MatchesLibraryFiniteDifferencesOnBatch) {
  Rng rng(2);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const Povm povm = parity_povm(3);
  const LossFunction loss = LossFunction::zero_one();
  const Batch batch = DatasetStream(3, 5).batch(0, 50);
  const ParamVector theta = random_params(c, rng);
  const RealVector exact = exact_expected_gradient(c, theta, povm, batch, loss);
  const RealVector fd = finite_difference_gradient(c, theta, povm, batch, loss);
  EXPECT_LT((exact - fd).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ExactGradientTest, ConstantLossHasZeroGradient) {
  Rng rng(3);
  const LayeredCircuit c = builtin_circuit("Q4L4");
  const ParamVector theta = random_params(c, rng);
  const LabeledSample s = generate_sample(4, rng);
  const RealVector g =
      exact_per_sample_gradient(c, theta, parity_povm(4), s, LossFunction::constant(2.5));
  EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExactGradientTest, CommutingCoordinateHasZeroPartial) {
  // Final-layer Z rotations commute with the diagonal parity POVM.
  Rng rng(4);
  const LayeredCircuit c(3, {uniform_layer(3, Pauli::Y, {{1, 2}}), uniform_layer(3, Pauli::Z)});
  const ParamVector theta = random_params(c, rng);
  const LabeledSample s{random_state(3, rng), 1};
  const RealVector g =
      exact_per_sample_gradient(c, theta, parity_povm(3), s, LossFunction::zero_one());
  for (int k = 3; k < 6; ++k) EXPECT_NEAR(g(k), 0.0, 1e-12);
  EXPECT_GT(g.head(3).cwiseAbs().maxCoeff(), 1e-6);
}

// Right side 2i Tr(O V (rho (x) |+><+|) V^dag) with the ancilla state built
// by a Kronecker product.
Complex CommutatorRhs(const HermitianOp& a, const HermitianOp& b, const Matrix& rho) {
  const auto pair = commutator_observable_pair(a, b);
  Matrix plus(2, 2);
  plus.setConstant(0.5);
  const Matrix ext = Kron(rho, plus);
  return 2.0 * kI * (pair.observable.matrix() * pair.unitary * ext * pair.unitary.adjoint()).trace();
}

TEST(CommutatorObservableTest, TrivialCases) {
  const HermitianOp z(pauli_matrix(Pauli::Z)), x(pauli_matrix(Pauli::X));
  Matrix plus(2, 2);
  plus.setConstant(0.5);
  EXPECT_NEAR(std::abs(CommutatorRhs(z, x, plus)), 0.0, 1e-14);
  Rng rng(5);
  const Eigen::VectorXcd v = random_state(1, rng).to_eigen();
  EXPECT_NEAR(std::abs(CommutatorRhs(z, z, v * v.adjoint())), 0.0, 1e-14);
}

TEST(CommutatorObservableTest, IdentityOnRandomInstances) {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    // A: a Pauli string conjugated by a random unitary. B: random Hermitian.
    Matrix p = Matrix::Identity(1, 1);
    for (int q = 0; q < 2; ++q) {
      const int k = static_cast<int>(rng.index(4));
      p = Kron(p, k == 3 ? Matrix(Matrix::Identity(2, 2)) : Matrix(pauli_matrix(static_cast<Pauli>(k))));
    }
    Matrix g(4, 4), h(4, 4);
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) {
        g(i, j) = Complex(rng.normal(), rng.normal());
        h(i, j) = Complex(rng.normal(), rng.normal());
      }
    const Matrix u = Eigen::HouseholderQR<Matrix>(g).householderQ();
    const Matrix am = u * p * u.adjoint();
    const HermitianOp a(0.5 * (am + am.adjoint()), 1e-9);
    const HermitianOp b(h + h.adjoint());
    const Eigen::VectorXcd psi = random_state(2, rng).to_eigen();
    const Matrix rho = psi * psi.adjoint();
    const Complex lhs = ((a.matrix() * b.matrix() - b.matrix() * a.matrix()) * rho).trace();
    EXPECT_LT(std::abs(lhs - CommutatorRhs(a, b, rho)), 1e-10);
  }
}

TEST(CommutatorObservableTest, RejectsNonInvolution) {
  Matrix half = 0.5 * Matrix::Identity(2, 2);
  EXPECT_THROW(commutator_observable_pair(HermitianOp(half), HermitianOp(half)), Error);
}

TEST(CommutatorObservableTest, AncillaHelpersAgreeWithKron) {
  Rng rng(7);
  const StateVector s = random_state(2, rng);
  const Eigen::VectorXcd v = s.to_eigen();
  Matrix plus(2, 2);
  plus.setConstant(0.5);
  EXPECT_LT((with_plus_ancilla(v * v.adjoint()) - Kron(v * v.adjoint(), plus)).norm(), 1e-15);
  const Eigen::VectorXcd ext = append_plus_ancilla(s).to_eigen();
  EXPECT_LT((ext * ext.adjoint() - Kron(v * v.adjoint(), plus)).norm(), 1e-15);
}

TEST(EstimatePartialTest, RangeAndCorrectPrediction) {
  Rng rng(8);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const Povm povm = parity_povm(3);
  const LossFunction loss = LossFunction::zero_one();
  // Only one POVM outcome: the prediction always equals the label.
  const Povm always_plus({{+1, Matrix::Identity(8, 8)}});
  const ParamVector theta = random_params(c, rng);
  for (int i = 0; i < 500; ++i) {
    const LabeledSample s = generate_sample(3, rng);
    const int k = static_cast<int>(rng.index(9));
    const double g = estimate_partial(c, theta, k, s, povm, loss, rng);
    ASSERT_TRUE(g == -1.0 || g == 0.0 || g == 1.0);
    const LabeledSample plus{s.state, +1};
    ASSERT_EQ(estimate_partial(c, theta, k, plus, always_plus, loss, rng), 0.0);
  }
}

TEST(EstimatePartialTest, MonteCarloMeanMatchesExact) {
  Rng rng(9);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const Povm povm = parity_povm(3);
  const LossFunction loss = LossFunction::zero_one();
  const ParamVector theta = random_params(c, rng);
  const LabeledSample s = generate_sample(3, rng);
  const RealVector exact = exact_per_sample_gradient(c, theta, povm, s, loss);
  for (int k : {0, 4, 8}) {
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = estimate_partial(c, theta, k, s, povm, loss, rng);
      sum += g;
      sum2 += g * g;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, exact(k), 3 * se) << k;
  }
}

TEST(SparseGradientTest, Materialize) {
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const CoordPair pair(1, 6, c);
  const RealVector zero = SparseGradient(pair, 0.0, 0.0, 9).materialize();
  EXPECT_EQ(zero.cwiseAbs().maxCoeff(), 0.0);
  const RealVector g = SparseGradient(pair, 1.0, -1.0, 9).materialize();
  RealVector expect = RealVector::Zero(9);
  expect(1) = 4.5;
  expect(6) = -4.5;
  EXPECT_EQ(g, expect);
}

TEST(SparseGradientTest, NeedsTwoSamples) {
  const LayeredCircuit c = builtin_circuit("Q3L3");
  Rng rng(10);
  const Batch one = {generate_sample(3, rng)};
  const ParamVector theta(9, 0.0);
  EXPECT_THROW(estimate_pair_gradient(c, theta, CoordPair(0, 1, c), one, parity_povm(3),
                                      LossFunction::zero_one(), rng),
               Error);
}

TEST(SparseGradientTest, UnbiasedOverPairsAndSamples) {
  Rng rng(11);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const Povm povm = parity_povm(3);
  const LossFunction loss = LossFunction::zero_one();
  const ParamVector theta = random_params(c, rng);
  // A small fixed batch plays the role of the data distribution.
  const Batch batch = DatasetStream(3, 11).batch(0, 8);
  const RealVector exact = exact_expected_gradient(c, theta, povm, batch, loss);
  const int n = 200000;
  RealVector sum = RealVector::Zero(9), sum2 = RealVector::Zero(9);
  Batch two(2, batch.front());
  for (int i = 0; i < n; ++i) {
    const CoordPair pair = random_coord_pair(c, rng);
    two[0] = batch[rng.index(batch.size())];
    two[1] = batch[rng.index(batch.size())];
    const RealVector g = estimate_pair_gradient(c, theta, pair, two, povm, loss, rng).materialize();
    sum += g;
    sum2 += g.cwiseProduct(g);
  }
  const RealVector mean = sum / n;
  const RealVector se = ((sum2 / n - mean.cwiseProduct(mean)) / n).cwiseSqrt();
  int outside = 0;
  for (int k = 0; k < 9; ++k) outside += std::abs(mean(k) - exact(k)) > 3 * se(k);
  EXPECT_LE(outside, 1);
}

}  // namespace
}  // namespace qnscd
