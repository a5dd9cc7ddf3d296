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

// Ensemble quantum Fisher information metric: the exact covariance form, the
// four-sample single-shot estimator of one 2x2 block, its regularized c x c
// embedding, and the ensemble fidelity / distance it is the Hessian of.

#ifndef QNSCD_METRIC_HPP_
#define QNSCD_METRIC_HPP_

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "qnscd/pqc.hpp"
#include "qnscd/simcore.hpp"

namespace qnscd {

// ----------------------------------------------------------------------------
// Exact metric (dense oracle)

namespace detail {

struct UpsilonMoments {
  std::vector<Matrix> ups;   // Upsilon_k
  std::vector<double> mean;  // Tr(Upsilon_k rho)
};

inline UpsilonMoments upsilon_moments(const LayeredCircuit& circuit,
                                      std::span<const double> theta,
                                      const DensityMatrix& rho) {
  UpsilonMoments m;
  const int c = circuit.num_params();
  m.ups.reserve(c);
  m.mean.reserve(c);
  for (int k = 0; k < c; ++k) {
    m.ups.push_back(upsilon(circuit, theta, k).matrix());
    m.mean.push_back((m.ups.back() * rho.matrix()).trace().real());
  }
  return m;
}

}  // namespace detail

/// F_kl = 1/2 Tr({Upsilon_k, Upsilon_l} rho) - Tr(Upsilon_k rho) Tr(Upsilon_l rho).
inline RealMatrix exact_eqfim(const LayeredCircuit& circuit,
                              std::span<const double> theta,
                              const LabeledEnsemble& ensemble) {
  check_params(circuit, theta);
  const DensityMatrix rho = ensemble_density(ensemble);
  const auto m = detail::upsilon_moments(circuit, theta, rho);
  const int c = circuit.num_params();
  RealMatrix f(c, c);
  for (int k = 0; k < c; ++k) {
    for (int l = k; l < c; ++l) {
      const Matrix anti = m.ups[k] * m.ups[l] + m.ups[l] * m.ups[k];
      const double v =
          0.5 * (anti * rho.matrix()).trace().real() - m.mean[k] * m.mean[l];
      f(k, l) = v;
      f(l, k) = v;
    }
  }
  return f;
}

/// Same metric through Re{Tr(Upsilon_k Upsilon_l rho)} - Tr(.)Tr(.).
inline RealMatrix exact_eqfim_re_form(const LayeredCircuit& circuit,
                                      std::span<const double> theta,
                                      const LabeledEnsemble& ensemble) {
  check_params(circuit, theta);
  const DensityMatrix rho = ensemble_density(ensemble);
  const auto m = detail::upsilon_moments(circuit, theta, rho);
  const int c = circuit.num_params();
  RealMatrix f(c, c);
  for (int k = 0; k < c; ++k) {
    for (int l = 0; l < c; ++l) {
      f(k, l) = (m.ups[k] * m.ups[l] * rho.matrix()).trace().real() -
                m.mean[k] * m.mean[l];
    }
  }
  return f;
}

// ----------------------------------------------------------------------------
// Single-shot measurements

/// Runs layers 1..a-1 for the coordinate's layer a and measures its Pauli on
/// its qubit. Returns the +-1 outcome; `state` is left collapsed.
inline int measure_coordinate(const LayeredCircuit& circuit,
                              std::span<const double> theta, int coord,
                              StateVector& state, Rng& rng) {
  const auto lq = circuit.locate(coord);
  forward_range(circuit, theta, state, 1, lq.layer);
  return measure_pauli(state, lq.qubit, circuit.axis(coord), rng);
}

struct SequentialOutcome {
  int u;  // first coordinate's Pauli after layers 1..a-1
  int w;  // second coordinate's Pauli after continuing through layer b-1
};

/// Sequential anticommutator measurement for a normalized pair (a <= b).
inline SequentialOutcome sequential_anticommutator_sample(
    const LayeredCircuit& circuit, std::span<const double> theta,
    const CoordPair& pair, StateVector sample, Rng& rng) {
  const auto first = circuit.locate(pair.first());
  const auto second = circuit.locate(pair.second());
  SequentialOutcome out{};
  out.u = measure_coordinate(circuit, theta, pair.first(), sample, rng);
  forward_range(circuit, theta, sample, first.layer, second.layer);
  out.w = measure_pauli(sample, second.qubit, circuit.axis(pair.second()), rng);
  return out;
}

/// Measurement record of one block estimate.
struct BlockOutcomes {
  std::array<int, 2> v{};  // samples 1-2: second coordinate alone
  std::array<int, 2> u{};  // samples 3-4: first coordinate
  std::array<int, 2> w{};  // samples 3-4: second coordinate after u
};

/// Z_[a_p, b_q] from a measurement record.
inline Eigen::Matrix2d block_from_outcomes(const BlockOutcomes& o) {
  const double z11 = 0.25 * (1.0 - o.u[0] * o.u[1]);
  const double z22 = 0.25 * (1.0 - o.v[0] * o.v[1]);
  const double z12 = 0.125 * (o.u[0] * o.w[0] + o.u[1] * o.w[1]) -
                     0.0625 * (o.u[0] + o.u[1]) * (o.v[0] + o.v[1]);
  Eigen::Matrix2d z;
  z << z11, z12, z12, z22;
  return z;
}

inline BlockOutcomes sample_block_outcomes(const LayeredCircuit& circuit,
                                           std::span<const double> theta,
                                           const CoordPair& pair,
                                           std::span<const StateVector> samples,
                                           Rng& rng) {
  if (samples.size() < 4) throw Error("estimate_block: needs four samples");
  BlockOutcomes o;
  for (int i = 0; i < 2; ++i) {
    StateVector s = samples[i];
    o.v[i] = measure_coordinate(circuit, theta, pair.second(), s, rng);
  }
  for (int i = 0; i < 2; ++i) {
    const auto uw =
        sequential_anticommutator_sample(circuit, theta, pair, samples[2 + i], rng);
    o.u[i] = uw.u;
    o.w[i] = uw.w;
  }
  return o;
}

/// Unbiased single-shot estimate of the 2x2 metric block at `pair`.
inline Eigen::Matrix2d estimate_block(const LayeredCircuit& circuit,
                                      std::span<const double> theta,
                                      const CoordPair& pair,
                                      std::span<const StateVector> samples,
                                      Rng& rng) {
  return block_from_outcomes(
      sample_block_outcomes(circuit, theta, pair, samples, rng));
}

// ----------------------------------------------------------------------------
// Regularized embedding

/// Sparse metric estimate: the raw block at a coordinate pair together with
/// the regularization needed to form Z~ and Z-bar.
class MetricEstimate {
 public:
  MetricEstimate(Eigen::Matrix2d block, CoordPair pair, int c, double beta)
      : block_(std::move(block)), pair_(pair), c_(c), beta_(beta) {
    if (!(beta > 0.0)) throw Error("embed_regularize: beta must be positive");
    if (c <= 2) throw Error("embed_regularize: need c > 2");
    if (std::abs(block_(0, 1) - block_(1, 0)) > kStructuralTol) {
      throw Error("embed_regularize: block is not symmetric");
    }
  }

  const CoordPair& pair() const { return pair_; }
  const Eigen::Matrix2d& block() const { return block_; }
  int num_params() const { return c_; }
  double beta() const { return beta_; }

  /// Active 2x2 of Z~: diagonal scaled by 1/(c-1) and shifted by beta.
  Eigen::Matrix2d regularized_block() const {
    Eigen::Matrix2d z = block_;
    z(0, 0) = block_(0, 0) / (c_ - 1) + beta_;
    z(1, 1) = block_(1, 1) / (c_ - 1) + beta_;
    return z;
  }

  /// Z~_active - (2 beta / c) I_2; the only part entering the update.
  Eigen::Matrix2d shifted_block() const {
    return regularized_block() - (2.0 * beta_ / c_) * Eigen::Matrix2d::Identity();
  }

  /// Dense Z~ (c x c).
  RealMatrix materialize_tilde() const {
    RealMatrix z = RealMatrix::Zero(c_, c_);
    const Eigen::Matrix2d r = regularized_block();
    const int i = pair_.first(), j = pair_.second();
    z(i, i) = r(0, 0);
    z(j, j) = r(1, 1);
    z(i, j) = r(0, 1);
    z(j, i) = r(1, 0);
    return z;
  }

  /// Dense Z-bar = c(c-1)/2 (Z~ - (2 beta / c) I).
  RealMatrix materialize() const {
    RealMatrix z = materialize_tilde();
    z.diagonal().array() -= 2.0 * beta_ / c_;
    return 0.5 * c_ * (c_ - 1) * z;
  }

 private:
  Eigen::Matrix2d block_;
  CoordPair pair_;
  int c_;
  double beta_;
};

inline MetricEstimate embed_regularize(const Eigen::Matrix2d& block,
                                       const CoordPair& pair, int c,
                                       double beta) {
  return MetricEstimate(block, pair, c, beta);
}

/// Smallest eigenvalue of Z~_active - (2 beta / c) I over all 64 outcome
/// records (u1,u2,v1,v2,w1,w2) in {+-1}^6.
inline double min_regularized_eigenvalue(int c, double beta) {
  double worst = std::numeric_limits<double>::infinity();
  for (int bits = 0; bits < 64; ++bits) {
    auto pm = [bits](int k) { return (bits >> k) & 1 ? -1 : +1; };
    BlockOutcomes o;
    o.u = {pm(0), pm(1)};
    o.v = {pm(2), pm(3)};
    o.w = {pm(4), pm(5)};
    const Eigen::Matrix2d z = block_from_outcomes(o);
    Eigen::Matrix2d shifted = z;
    shifted(0, 0) = z(0, 0) / (c - 1) + beta - 2.0 * beta / c;
    shifted(1, 1) = z(1, 1) / (c - 1) + beta - 2.0 * beta / c;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(shifted,
                                                       Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff());
  }
  return worst;
}

/// Threshold above which every outcome record yields a positive-definite
/// regularized block. Bisection on [0, 2].
inline double min_beta(int c) {
  if (c <= 2) throw Error("min_beta: need c > 2");
  double lo = 0.0, hi = 2.0;
  if (min_regularized_eigenvalue(c, hi) <= 0.0) {
    throw Error("min_beta: no threshold in [0, 2]");
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (min_regularized_eigenvalue(c, mid) > 0.0 ? hi : lo) = mid;
  }
  return hi;
}

// ----------------------------------------------------------------------------
// Ensemble fidelity and distance

/// sum_x Q_X(x) <phi_x(theta)|phi_x(theta')>.
inline Complex ensemble_overlap(const LayeredCircuit& circuit,
                                std::span<const double> theta,
                                std::span<const double> theta_prime,
                                const LabeledEnsemble& ensemble) {
  Complex acc(0.0);
  for (const auto& m : ensemble.members()) {
    const StateVector a = forward_copy(circuit, theta, m.state);
    const StateVector b = forward_copy(circuit, theta_prime, m.state);
    acc += m.probability * inner_product(a, b);
  }
  return acc;
}

inline double ensemble_fidelity(const LayeredCircuit& circuit,
                                std::span<const double> theta,
                                std::span<const double> theta_prime,
                                const LabeledEnsemble& ensemble) {
  return std::norm(ensemble_overlap(circuit, theta, theta_prime, ensemble));
}

/// sum_x Q_X(x) |<phi_x(theta)|phi_x(theta')>|^2, the middle term of the
/// fidelity sandwich.
inline double average_pure_fidelity(const LayeredCircuit& circuit,
                                    std::span<const double> theta,
                                    std::span<const double> theta_prime,
                                    const LabeledEnsemble& ensemble) {
  double acc = 0.0;
  for (const auto& m : ensemble.members()) {
    const StateVector a = forward_copy(circuit, theta, m.state);
    const StateVector b = forward_copy(circuit, theta_prime, m.state);
    acc += m.probability * std::norm(inner_product(a, b));
  }
  return acc;
}

/// Ensemble after applying U(theta) to every member.
inline LabeledEnsemble evolve_ensemble(const LayeredCircuit& circuit,
                                       std::span<const double> theta,
                                       const LabeledEnsemble& ensemble) {
  std::vector<EnsembleMember> out;
  out.reserve(ensemble.size());
  for (const auto& m : ensemble.members()) {
    out.push_back({m.probability, forward_copy(circuit, theta, m.state), m.label});
  }
  return LabeledEnsemble(std::move(out));
}

inline double ensemble_distance_from_fidelity(double f) {
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(std::clamp(f, 0.0, 1.0))));
}

inline double ensemble_distance(const LayeredCircuit& circuit,
                                std::span<const double> theta,
                                std::span<const double> theta_prime,
                                const LabeledEnsemble& ensemble) {
  return ensemble_distance_from_fidelity(
      ensemble_fidelity(circuit, theta, theta_prime, ensemble));
}

/// Squared distance without the sqrt/clamp round trip; accurate for tiny
/// separations.
inline double ensemble_distance_squared(const LayeredCircuit& circuit,
                                        std::span<const double> theta,
                                        std::span<const double> theta_prime,
                                        const LabeledEnsemble& ensemble) {
  const double f = ensemble_fidelity(circuit, theta, theta_prime, ensemble);
  return 2.0 - 2.0 * std::sqrt(f);
}

/// Bures distance between the ensemble density matrices.
inline double bures_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return ensemble_distance_from_fidelity(uhlmann_fidelity(a, b));
}

}  // namespace qnscd

#endif  // QNSCD_METRIC_HPP_
