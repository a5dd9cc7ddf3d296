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

#include "qnscd/metric.hpp"
#include "oracles.hpp"

namespace qnscd {
namespace {

using oracle::HeisenbergPauli;
using oracle::MetricOracle;
using oracle::Projector;

TEST(ExactMetricTest, MatchesDefinitionOracle) {
  Rng rng(1);
  for (const auto& name : {"Q3L3", "Q4L4"}) {
    const LayeredCircuit c = builtin_circuit(name);
    const ParamVector theta = random_params(c, rng);
    const LabeledEnsemble e = random_ensemble(c.num_qubits(), 4, rng);
    const RealMatrix f = exact_eqfim(c, theta, e);
    EXPECT_LT((f - MetricOracle(c, theta, ensemble_density(e).matrix())).norm(), 1e-12) << name;
    EXPECT_LT((f - exact_eqfim_re_form(c, theta, e)).norm(), 1e-12) << name;
  }
}

TEST(ExactMetricTest, SingleQubitYOnZero) {
  const LayeredCircuit c(1, {uniform_layer(1, Pauli::Y)});
  const ParamVector theta = {0.3};
  const LabeledEnsemble e({{1.0, StateVector(1), 1}});
  EXPECT_NEAR(exact_eqfim(c, theta, e)(0, 0), 0.25, 1e-15);
}

TEST(ExactMetricTest, MaximallyMixedGivesQuarterDiagonal) {
  // Uniform mixture of a basis: rho = I / 2^d at every layer boundary.
  Rng rng(2);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  std::vector<EnsembleMember> members;
  for (std::size_t i = 0; i < 8; ++i) members.push_back({0.125, StateVector::basis(3, i), 1});
  const RealMatrix f = exact_eqfim(c, random_params(c, rng), LabeledEnsemble(members));
  for (int k = 0; k < 9; ++k) EXPECT_NEAR(f(k, k), 0.25, 1e-12);
}

TEST(ExactMetricTest, DiagonalIsQuarterMinusSquaredMean) {
  Rng rng(3);
  const LayeredCircuit c = builtin_circuit("Q4L4");
  const ParamVector theta = random_params(c, rng);
  const LabeledEnsemble e = random_ensemble(4, 3, rng);
  const Matrix rho = ensemble_density(e).matrix();
  const RealMatrix f = exact_eqfim(c, theta, e);
  for (int k = 0; k < c.num_params(); ++k) {
    const double mean = 0.5 * (HeisenbergPauli(c, theta, k) * rho).trace().real();
    EXPECT_NEAR(f(k, k), 0.25 - mean * mean, 1e-12);
    EXPECT_GE(f(k, k), -1e-15);
    EXPECT_LE(f(k, k), 0.25 + 1e-15);
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(f);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(SequentialSampleTest, OrthogonalAxesAnticommute) {
  // Z then X on one qubit with identity in between; {Z, X} = 0.
  const LayeredCircuit c(1, {uniform_layer(1, Pauli::Z), uniform_layer(1, Pauli::X)});
  const ParamVector theta = {0.0, 0.0};
  const CoordPair pair(0, 1, c);
  Rng rng(4);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto o = sequential_anticommutator_sample(c, theta, pair, StateVector(1), rng);
    sum += o.u * o.w;
  }
  EXPECT_NEAR(sum / n, 0.0, 3.0 / std::sqrt(n));
}

TEST(SequentialSampleTest, RepeatedAxisIsIdempotent) {
  const LayeredCircuit c(2, {uniform_layer(2, Pauli::X), uniform_layer(2, Pauli::X)});
  const ParamVector theta(4, 0.0);
  const CoordPair pair(1, 3, c);  // qubit 2 in both layers
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto o = sequential_anticommutator_sample(c, theta, pair, random_state(2, rng), rng);
    ASSERT_EQ(o.u * o.w, 1);
  }
}

TEST(SequentialSampleTest, MatchesDenseAnticommutator) {
  Rng rng(6);
  const LayeredCircuit c(2, {uniform_layer(2, Pauli::Y, {{1, 2}}),
                             uniform_layer(2, Pauli::X, {{2, 1}}), uniform_layer(2, Pauli::Z)});
  for (int inst = 0; inst < 3; ++inst) {
    const ParamVector theta = random_params(c, rng);
    const StateVector psi = random_state(2, rng);
    const CoordPair pair(1 + static_cast<int>(rng.index(2)), 4 + static_cast<int>(rng.index(2)), c);
    const Matrix a = HeisenbergPauli(c, theta, pair.first());
    const Matrix b = HeisenbergPauli(c, theta, pair.second());
    const double expect = 0.5 * ((a * b + b * a) * Projector(psi)).trace().real();
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto o = sequential_anticommutator_sample(c, theta, pair, psi, rng);
      sum += o.u * o.w;
      sum2 += 1.0;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, expect, 3 * se + 1e-12);
  }
}

TEST(BlockTest, ArithmeticExamples) {
  BlockOutcomes all_plus;
  all_plus.u = {1, 1};
  all_plus.v = {1, 1};
  all_plus.w = {1, 1};
  EXPECT_LT(block_from_outcomes(all_plus).cwiseAbs().maxCoeff(), 1e-15);

  BlockOutcomes o;
  o.u = {1, -1};
  o.v = {1, -1};
  o.w = {1, 1};
  const Eigen::Matrix2d z = block_from_outcomes(o);
  EXPECT_DOUBLE_EQ(z(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(z(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(z(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(z(1, 0), 0.0);
}

TEST(BlockTest, NeedsFourSamples) {
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const ParamVector theta(9, 0.0);
  const std::vector<StateVector> three(3, StateVector(3));
  Rng rng(7);
  EXPECT_THROW(estimate_block(c, theta, CoordPair(0, 1, c), three, rng), Error);
}

TEST(BlockTest, MonteCarloMeanMatchesExactSubmatrix) {
  Rng rng(8);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const ParamVector theta = random_params(c, rng);
  const LabeledEnsemble e = random_ensemble(3, 4, rng);
  const RealMatrix f = MetricOracle(c, theta, ensemble_density(e).matrix());
  const CoordPair pair(2, 7, c);
  const int n = 200000;
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero(), sum2 = Eigen::Matrix2d::Zero();
  std::vector<StateVector> samples(4, StateVector(3));
  for (int i = 0; i < n; ++i) {
    for (auto& s : samples) s = e.sample(rng).state;
    const Eigen::Matrix2d z = estimate_block(c, theta, pair, samples, rng);
    sum += z;
    sum2 += z.cwiseProduct(z);
  }
  const Eigen::Matrix2d mean = sum / n;
  const Eigen::Matrix2d se = ((sum2 / n - mean.cwiseProduct(mean)) / n).cwiseSqrt();
  const int idx[2] = {pair.first(), pair.second()};
  for (int r = 0; r < 2; ++r) {
    for (int s = 0; s < 2; ++s) {
      EXPECT_NEAR(mean(r, s), f(idx[r], idx[s]), 3 * se(r, s)) << r << s;
    }
  }
}

TEST(EmbedRegularizeTest, ZeroBlockAtCThree) {
  const LayeredCircuit c(3, {uniform_layer(3, Pauli::Y)});
  const MetricEstimate m = embed_regularize(Eigen::Matrix2d::Zero(), CoordPair(0, 2, c), 3, 0.7);
  const RealMatrix tilde = m.materialize_tilde();
  EXPECT_DOUBLE_EQ(tilde(0, 0), 0.7);
  EXPECT_DOUBLE_EQ(tilde(2, 2), 0.7);
  EXPECT_DOUBLE_EQ(tilde(1, 1), 0.0);
  const RealMatrix bar = m.materialize();
  const RealMatrix expect =
      3.0 * (tilde - (2.0 * 0.7 / 3.0) * RealMatrix::Identity(3, 3));
  EXPECT_LT((bar - expect).norm(), 1e-14);
  EXPECT_NEAR(bar(0, 0), 3.0 * (0.7 - 0.46667), 1e-4);
}

TEST(EmbedRegularizeTest, InactiveOffDiagonalsAreZero) {
  Rng rng(9);
  const LayeredCircuit c = builtin_circuit("Q4L4");
  for (int t = 0; t < 50; ++t) {
    const CoordPair pair = random_coord_pair(c, rng);
    Eigen::Matrix2d b;
    const double off = rng.uniform(-0.5, 0.5);
    b << rng.uniform(0, 0.5), off, off, rng.uniform(0, 0.5);
    const RealMatrix z = embed_regularize(b, pair, 16, 0.8).materialize();
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        if (i == j) continue;
        const bool active = (i == pair.first() && j == pair.second()) ||
                            (i == pair.second() && j == pair.first());
        if (!active) ASSERT_EQ(z(i, j), 0.0);
      }
    }
  }
}

TEST(EmbedRegularizeTest, RejectsBadArguments) {
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const CoordPair pair(0, 1, c);
  EXPECT_THROW(embed_regularize(Eigen::Matrix2d::Zero(), pair, 9, 0.0), Error);
  EXPECT_THROW(embed_regularize(Eigen::Matrix2d::Zero(), pair, 2, 0.7), Error);
  Eigen::Matrix2d asym;
  asym << 0, 1, 0, 0;
  EXPECT_THROW(embed_regularize(asym, pair, 9, 0.7), Error);
}

TEST(EmbedRegularizeTest, MonteCarloMatchesExactMetric) {
  Rng rng(10);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const int k = c.num_params();
  const ParamVector theta = random_params(c, rng);
  const LabeledEnsemble e = random_ensemble(3, 3, rng);
  const RealMatrix f = MetricOracle(c, theta, ensemble_density(e).matrix());
  const int n = 200000;
  RealMatrix sum = RealMatrix::Zero(k, k), sum2 = RealMatrix::Zero(k, k);
  std::vector<StateVector> samples(4, StateVector(3));
  for (int i = 0; i < n; ++i) {
    const CoordPair pair = random_coord_pair(c, rng);
    for (auto& s : samples) s = e.sample(rng).state;
    const RealMatrix z =
        embed_regularize(estimate_block(c, theta, pair, samples, rng), pair, k, 0.7).materialize();
    sum += z;
    sum2 += z.cwiseProduct(z);
  }
  const RealMatrix mean = sum / n;
  const RealMatrix se = ((sum2 / n - mean.cwiseProduct(mean)) / n).cwiseSqrt();
  int outside = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) outside += std::abs(mean(i, j) - f(i, j)) > 3 * se(i, j);
  // 81 cells, each a 3-sigma test: allow the binomial tail (p ~ 0.0027).
  EXPECT_LE(outside, 2);
}

// Smallest eigenvalue over every outcome record, from the closed-form 2x2
// eigenvalues of the regularized block.
double EnumeratedMinEigen(int c, double beta) {
  double worst = 1e300;
  for (int bits = 0; bits < 64; ++bits) {
    int s[6];
    for (int k = 0; k < 6; ++k) s[k] = (bits >> k) & 1 ? -1 : 1;
    const double u1 = s[0], u2 = s[1], v1 = s[2], v2 = s[3], w1 = s[4], w2 = s[5];
    const double shift = beta - 2 * beta / c;
    const double a = (1 - u1 * u2) / (4.0 * (c - 1)) + shift;
    const double d = (1 - v1 * v2) / (4.0 * (c - 1)) + shift;
    const double b = (u1 * w1 + u2 * w2) / 8.0 - (u1 + u2) * (v1 + v2) / 16.0;
    worst = std::min(worst, 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b));
  }
  return worst;
}

TEST(MinBetaTest, ClosedFormAndEnumeration) {
  for (int c : {3, 9, 16, 30, 36, 48, 100}) {
    const double beta = min_beta(c);
    EXPECT_NEAR(beta, c / (2.0 * (c - 2)), 1e-8) << c;
    EXPECT_GT(EnumeratedMinEigen(c, beta + 1e-4), 0.0) << c;
    EXPECT_LE(EnumeratedMinEigen(c, beta - 1e-4), 0.0) << c;
  }
  EXPECT_THROW(min_beta(2), Error);
}

TEST(MinBetaTest, PublishedThresholds) {
  EXPECT_NEAR(min_beta(9), 0.643, 1e-3);
  EXPECT_NEAR(min_beta(16), 0.572, 1e-3);
  EXPECT_NEAR(min_beta(30), 0.536, 1e-3);
  EXPECT_NEAR(min_beta(36), 0.5295, 1e-3);
  EXPECT_NEAR(min_beta(48), 0.5218, 1e-3);
}

TEST(EnsembleFidelityTest, Examples) {
  Rng rng(11);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const ParamVector t1 = random_params(c, rng), t2 = random_params(c, rng);
  const LabeledEnsemble e = random_ensemble(3, 4, rng);
  EXPECT_NEAR(ensemble_fidelity(c, t1, t1, e), 1.0, 1e-12);
  EXPECT_NEAR(ensemble_distance(c, t1, t1, e), 0.0, 1e-6);

  const StateVector psi = random_state(3, rng);
  const LabeledEnsemble single({{1.0, psi, 1}});
  const double pure =
      std::norm(inner_product(forward_copy(c, t1, psi), forward_copy(c, t2, psi)));
  EXPECT_NEAR(ensemble_fidelity(c, t1, t2, single), pure, 1e-12);
}

TEST(EnsembleFidelityTest, OrthogonalStatesGiveSqrtTwo) {
  // R_Y(pi) maps |0> to |1>.
  const LayeredCircuit c(1, {uniform_layer(1, Pauli::Y)});
  const ParamVector t0 = {0.0}, t1 = {kPi};
  const LabeledEnsemble e({{1.0, StateVector(1), 1}});
  EXPECT_NEAR(ensemble_distance(c, t0, t1, e), std::sqrt(2.0), 1e-12);
}

TEST(EnsembleFidelityTest, BoundedByUhlmannAndBures) {
  Rng rng(12);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  for (int i = 0; i < 200; ++i) {
    const ParamVector t1 = random_params(c, rng), t2 = random_params(c, rng);
    const LabeledEnsemble e = random_ensemble(3, 1 + static_cast<int>(rng.index(5)), rng);
    const double fe = ensemble_fidelity(c, t1, t2, e);
    const DensityMatrix r1 = ensemble_density(evolve_ensemble(c, t1, e));
    const DensityMatrix r2 = ensemble_density(evolve_ensemble(c, t2, e));
    EXPECT_LE(fe, uhlmann_fidelity(r1, r2) + 1e-8);
    EXPECT_LE(fe, average_pure_fidelity(c, t1, t2, e) + 1e-12);
    EXPECT_GE(ensemble_distance(c, t1, t2, e) + 1e-8, bures_distance(r1, r2));
  }
}

TEST(EnsembleFidelityTest, RootFidelityConcavityBound) {
  // (sum_x Q |<phi_x|phi'_x>|)^2 <= f_rho: joint concavity of sqrt(F).
  Rng rng(13);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  for (int i = 0; i < 200; ++i) {
    const ParamVector t1 = random_params(c, rng), t2 = random_params(c, rng);
    const LabeledEnsemble e = random_ensemble(3, 1 + static_cast<int>(rng.index(5)), rng);
    double root = 0.0;
    for (const auto& m : e.members()) {
      root += m.probability * std::abs(inner_product(forward_copy(c, t1, m.state),
                                                     forward_copy(c, t2, m.state)));
    }
    const double fr = uhlmann_fidelity(ensemble_density(evolve_ensemble(c, t1, e)),
                                       ensemble_density(evolve_ensemble(c, t2, e)));
    EXPECT_LE(root * root, fr + 1e-8);
  }
}

TEST(EnsembleFidelityTest, AveragePureFidelityCanExceedUhlmann) {
  // U1 = I, U2 = I (x) R_Y(pi). x1 = |0>|+i> is fixed by U2 up to phase and
  // x2 = |10> is sent to |11>. The average of pure-state fidelities is 1/2
  // while f_rho = (1/2)^2 = 1/4.
  const LayeredCircuit c(2, {uniform_layer(2, Pauli::Y)});
  const ParamVector t1 = {0.0, 0.0}, t2 = {0.0, kPi};
  const double r = std::sqrt(0.5);
  const StateVector x1 = StateVector::from_amplitudes({r, Complex(0.0, r), 0.0, 0.0});
  const StateVector x2 = StateVector::basis(2, 0b10);
  const LabeledEnsemble e({{0.5, x1, 1}, {0.5, x2, -1}});
  const double mid = average_pure_fidelity(c, t1, t2, e);
  const double fr = uhlmann_fidelity(ensemble_density(evolve_ensemble(c, t1, e)),
                                     ensemble_density(evolve_ensemble(c, t2, e)));
  EXPECT_NEAR(mid, 0.5, 1e-12);
  EXPECT_NEAR(fr, 0.25, 1e-8);
  EXPECT_LE(ensemble_fidelity(c, t1, t2, e), mid);
}

TEST(EnsembleDistanceTest, TaylorRatioApproachesOne) {
  Rng rng(14);
  const LayeredCircuit c = builtin_circuit("Q3L3");
  const ParamVector theta = random_params(c, rng);
  const LabeledEnsemble e = random_ensemble(3, 4, rng);
  const RealMatrix f = exact_eqfim(c, theta, e);
  for (int dir = 0; dir < 10; ++dir) {
    RealVector v(9);
    for (int k = 0; k < 9; ++k) v(k) = rng.normal();
    v.normalize();
    for (const auto& [len, tol] : {std::pair{1e-2, 0.05}, std::pair{1e-3, 0.005}}) {
      ParamVector plus = theta, minus = theta;
      for (int k = 0; k < 9; ++k) {
        plus[k] += len * v(k);
        minus[k] -= len * v(k);
      }
      const double quad = len * len * v.dot(f * v);
      const double ratio = 0.5 *
                           (ensemble_distance_squared(c, theta, plus, e) +
                            ensemble_distance_squared(c, theta, minus, e)) /
                           quad;
      EXPECT_NEAR(ratio, 1.0, tol) << len;
    }
  }
}

}  // namespace
}  // namespace qnscd
