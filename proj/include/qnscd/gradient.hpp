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

// Exact loss gradient and the single-shot ancilla gradient estimator.

#ifndef QNSCD_GRADIENT_HPP_
#define QNSCD_GRADIENT_HPP_

#include <array>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "qnscd/loss.hpp"
#include "qnscd/pqc.hpp"
#include "qnscd/simcore.hpp"

namespace qnscd {

/// d/dtheta of per_sample_expected_loss, every coordinate.
///
/// For coordinate (a,p): with psi_a the state entering layer a and
/// chi = sigma_p psi_a, both pushed through layers a..L,
///   dL = sum_yhat l(y, yhat) Im <psi_L| Lambda_yhat |chi_L>.
inline RealVector exact_per_sample_gradient(const LayeredCircuit& circuit,
                                            std::span<const double> theta,
                                            const Povm& povm,
                                            const LabeledSample& sample,
                                            const LossFunction& loss) {
  check_params(circuit, theta);
  const int d = circuit.num_qubits();
  const int layers = circuit.num_layers();
  const StateVector out = forward_copy(circuit, theta, sample.state);
  const Eigen::VectorXcd psi_l = out.to_eigen();

  // Loss-weighted readout operator; the gradient only needs <psi_L| M.
  Matrix m = Matrix::Zero(povm.dim(), povm.dim());
  for (const auto& e : povm.elements()) m += loss(sample.label, e.label) * e.op;
  const Eigen::VectorXcd bra = m.adjoint() * psi_l;  // M^dag psi_L

  RealVector grad(circuit.num_params());
  StateVector psi_a = sample.state;
  for (int a = 1; a <= layers; ++a) {
    for (int p = 1; p <= d; ++p) {
      const int coord = (a - 1) * d + p - 1;
      StateVector chi = psi_a;
      apply_pauli(chi, p, circuit.axis(coord));
      forward_range(circuit, theta, chi, a, layers + 1);
      grad(coord) = bra.dot(chi.to_eigen()).imag();
    }
    apply_layer(circuit, theta, a, psi_a);
  }
  return grad;
}

/// Batch-averaged exact gradient.
inline RealVector exact_expected_gradient(const LayeredCircuit& circuit,
                                          std::span<const double> theta,
                                          const Povm& povm, const Batch& batch,
                                          const LossFunction& loss) {
  if (batch.empty()) throw Error("exact_expected_gradient: empty batch");
  RealVector g = RealVector::Zero(circuit.num_params());
  for (const auto& s : batch) {
    g += exact_per_sample_gradient(circuit, theta, povm, s, loss);
  }
  return g / static_cast<double>(batch.size());
}

/// Central finite differences of the batch-averaged expected loss.
inline RealVector finite_difference_gradient(const LayeredCircuit& circuit,
                                             std::span<const double> theta,
                                             const Povm& povm, const Batch& batch,
                                             const LossFunction& loss,
                                             double step = 1e-5) {
  ParamVector work(theta.begin(), theta.end());
  RealVector g(circuit.num_params());
  for (int k = 0; k < circuit.num_params(); ++k) {
    work[k] = theta[k] + step;
    const double plus = average_expected_loss(circuit, work, povm, batch, loss);
    work[k] = theta[k] - step;
    const double minus = average_expected_loss(circuit, work, povm, batch, loss);
    work[k] = theta[k];
    g(k) = (plus - minus) / (2.0 * step);
  }
  return g;
}

// ----------------------------------------------------------------------------
// Commutator observable

struct CommutatorObservable {
  HermitianOp observable;  // O = B (x) |0><0| - B (x) |1><1|
  Matrix unitary;          // V = e^{i pi A/4} (x) |0><0| + e^{-i pi A/4} (x) |1><1|
};

/// Builds (O, V) with Tr([A,B] rho) = 2i Tr(O V (rho (x) |+><+|) V^dag). The
/// ancilla is the last (least significant) tensor factor.
inline CommutatorObservable commutator_observable_pair(const HermitianOp& a,
                                                       const HermitianOp& b) {
  const Eigen::Index n = a.dim();
  if (b.dim() != n) throw Error("commutator_observable_pair: dimension mismatch");
  const Matrix id = Matrix::Identity(n, n);
  if ((a.matrix() * a.matrix() - id).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error("commutator_observable_pair: A^2 != I");
  }
  const double r = std::sqrt(0.5);
  const Matrix plus = r * (id + Complex(0.0, 1.0) * a.matrix());
  const Matrix minus = r * (id - Complex(0.0, 1.0) * a.matrix());

  Matrix o = Matrix::Zero(2 * n, 2 * n);
  Matrix v = Matrix::Zero(2 * n, 2 * n);
  // Index (i, anc) -> 2i + anc.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      o(2 * i, 2 * j) = b.matrix()(i, j);
      o(2 * i + 1, 2 * j + 1) = -b.matrix()(i, j);
      v(2 * i, 2 * j) = plus(i, j);
      v(2 * i + 1, 2 * j + 1) = minus(i, j);
    }
  }
  return {HermitianOp(std::move(o)), std::move(v)};
}

/// rho (x) |+><+| with the ancilla last.
inline Matrix with_plus_ancilla(const Matrix& rho) {
  const Eigen::Index n = rho.rows();
  Matrix out(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.block<2, 2>(2 * i, 2 * j).setConstant(0.5 * rho(i, j));
    }
  }
  return out;
}

// ----------------------------------------------------------------------------
// Single-shot estimator

/// Appends |+> as a new least significant qubit.
inline StateVector append_plus_ancilla(const StateVector& state) {
  const double r = std::sqrt(0.5);
  std::vector<Complex> amps(state.dim() * 2);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    amps[2 * i] = r * state[i];
    amps[2 * i + 1] = r * state[i];
  }
  return StateVector::from_amplitudes(std::move(amps));
}

/// One-shot estimate of d/dtheta_coord of the per-sample expected loss.
inline double estimate_partial(const LayeredCircuit& circuit,
                               std::span<const double> theta, int coord,
                               const LabeledSample& sample, const Povm& povm,
                               const LossFunction& loss, Rng& rng) {
  const auto lq = circuit.locate(coord);
  const int d = circuit.num_qubits();
  StateVector work = sample.state;
  forward_range(circuit, theta, work, 1, lq.layer);

  StateVector ext = append_plus_ancilla(work);
  const Matrix2 sigma = pauli_matrix(circuit.axis(coord));
  const double r = std::sqrt(0.5);
  const Matrix2 fwd = r * (Matrix2::Identity() + Complex(0.0, 1.0) * sigma);
  const Matrix2 bwd = r * (Matrix2::Identity() - Complex(0.0, 1.0) * sigma);
  apply_controlled_1q(ext, d + 1, 0, lq.qubit, fwd);
  apply_controlled_1q(ext, d + 1, 1, lq.qubit, bwd);
  forward_range(circuit, theta, ext, lq.layer, circuit.num_layers() + 1);

  auto [b, system] = measure_and_discard(ext, d + 1, rng);
  const int y_hat = measure_povm(system, povm, rng);
  const double l = loss(sample.label, y_hat);
  return b == 1 ? l : -l;
}

/// Two-coordinate gradient estimate, materialized as
/// (c/2)(g_first e_first + g_second e_second).
class SparseGradient {
 public:
  SparseGradient(CoordPair pair, double g_first, double g_second, int c)
      : pair_(pair), values_{g_first, g_second}, c_(c) {}

  const CoordPair& pair() const { return pair_; }
  double first() const { return values_[0]; }
  double second() const { return values_[1]; }
  Eigen::Vector2d values() const { return {values_[0], values_[1]}; }
  int num_params() const { return c_; }

  RealVector materialize() const {
    RealVector g = RealVector::Zero(c_);
    g(pair_.first()) = 0.5 * c_ * values_[0];
    g(pair_.second()) = 0.5 * c_ * values_[1];
    return g;
  }

 private:
  CoordPair pair_;
  std::array<double, 2> values_;
  int c_;
};

inline SparseGradient estimate_pair_gradient(const LayeredCircuit& circuit,
                                             std::span<const double> theta,
                                             const CoordPair& pair,
                                             std::span<const LabeledSample> samples,
                                             const Povm& povm,
                                             const LossFunction& loss, Rng& rng) {
  if (samples.size() < 2) throw Error("estimate_pair_gradient: needs two samples");
  const double g1 =
      estimate_partial(circuit, theta, pair.first(), samples[0], povm, loss, rng);
  const double g2 =
      estimate_partial(circuit, theta, pair.second(), samples[1], povm, loss, rng);
  return SparseGradient(pair, g1, g2, circuit.num_params());
}

}  // namespace qnscd

#endif  // QNSCD_GRADIENT_HPP_
