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

// Pairwise natural coordinate descent, randomized SGD baselines and the
// deterministic exact-metric reference optimizers.

#ifndef QNSCD_OPTIMIZER_HPP_
#define QNSCD_OPTIMIZER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnscd/dataset.hpp"
#include "qnscd/gradient.hpp"
#include "qnscd/loss.hpp"
#include "qnscd/metric.hpp"
#include "qnscd/pqc.hpp"
#include "qnscd/simcore.hpp"

namespace qnscd {

// ----------------------------------------------------------------------------
// 2x2 linear algebra

/// (m^T m)^{1/2}. Symmetric inputs go through their own eigendecomposition,
/// giving eigenvalues |lambda_i| on the same eigenvectors.
inline Eigen::Matrix2d abs_psd_2x2(const Eigen::Matrix2d& m) {
  if (!m.allFinite()) throw Error("abs_psd_2x2: non-finite entries");
  const bool symmetric = m(0, 1) == m(1, 0);
  const Eigen::Matrix2d s = symmetric ? m : Eigen::Matrix2d(m.transpose() * m);
  const double a = s(0, 0), b = s(0, 1), d = s(1, 1);
  const double mid = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  const double l1 = mid + rad, l2 = mid - rad;
  auto f = [symmetric](double l) {
    return symmetric ? std::abs(l) : std::sqrt(std::max(l, 0.0));
  };
  if (rad == 0.0) return f(l1) * Eigen::Matrix2d::Identity();
  // Spectral projector onto the l1 eigenspace.
  const Eigen::Matrix2d p1 = (s - l2 * Eigen::Matrix2d::Identity()) / (l1 - l2);
  const Eigen::Matrix2d p2 = Eigen::Matrix2d::Identity() - p1;
  Eigen::Matrix2d out = f(l1) * p1 + f(l2) * p2;
  out(1, 0) = out(0, 1) = 0.5 * (out(0, 1) + out(1, 0));
  return out;
}

/// |M| for a dense real symmetric matrix.
inline RealMatrix abs_symmetric(const RealMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() *
         es.eigenvectors().transpose();
}

// ----------------------------------------------------------------------------
// Update rules

/// 2x2 form: theta_pair -= eta |Z~_block - (2 beta/c) I|^{-1} [g_first, g_second].
inline ParamVector qnscd_step(std::span<const double> theta,
                              const MetricEstimate& metric,
                              const SparseGradient& grad, double eta) {
  if (metric.pair().first() != grad.pair().first() ||
      metric.pair().second() != grad.pair().second()) {
    throw Error("qnscd_step: metric and gradient pairs differ");
  }
  const Eigen::Matrix2d a = abs_psd_2x2(metric.shifted_block());
  const double det = a.determinant();
  if (!(std::abs(det) > 1e-14)) {
    throw Error("qnscd_step: singular regularized block (beta too small?)");
  }
  const Eigen::Vector2d step = a.inverse() * grad.values();
  ParamVector out(theta.begin(), theta.end());
  out[metric.pair().first()] -= eta * step(0);
  out[metric.pair().second()] -= eta * step(1);
  return out;
}

/// c x c form with the materialized Z-bar and sparse gradient. The (c-1)
/// normalization is applied to eta here so both forms agree.
inline ParamVector qnscd_step_dense(std::span<const double> theta,
                                    const MetricEstimate& metric,
                                    const SparseGradient& grad, double eta) {
  const int c = metric.num_params();
  const RealMatrix z = abs_symmetric(metric.materialize());
  const RealVector g = grad.materialize();
  const RealVector step = z.ldlt().solve(g);
  ParamVector out(theta.begin(), theta.end());
  for (int k = 0; k < c; ++k) out[k] -= eta * (c - 1) * step(k);
  return out;
}

// ----------------------------------------------------------------------------
// Baseline gradient estimators

/// 2-RQSGD: three single shots per coordinate of a random pair, averaged,
/// scaled by c/2.
inline RealVector estimate_rqsgd_pair_gradient(const LayeredCircuit& circuit,
                                               std::span<const double> theta,
                                               const CoordPair& pair,
                                               std::span<const LabeledSample> samples,
                                               const Povm& povm,
                                               const LossFunction& loss, Rng& rng) {
  if (samples.size() < 6) throw Error("2-RQSGD: needs six samples");
  double g1 = 0.0, g2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    g1 += estimate_partial(circuit, theta, pair.first(), samples[i], povm, loss, rng);
  }
  for (int i = 3; i < 6; ++i) {
    g2 += estimate_partial(circuit, theta, pair.second(), samples[i], povm, loss, rng);
  }
  const int c = circuit.num_params();
  RealVector g = RealVector::Zero(c);
  g(pair.first()) = 0.5 * c * g1 / 3.0;
  g(pair.second()) = 0.5 * c * g2 / 3.0;
  return g;
}

/// Six distinct coordinates, uniformly at random.
inline std::array<int, 6> random_six_coords(int c, Rng& rng) {
  if (c < 6) throw Error("6-RQSGD: needs at least six parameters");
  std::vector<int> idx(c);
  std::iota(idx.begin(), idx.end(), 0);
  std::array<int, 6> out{};
  for (int k = 0; k < 6; ++k) {
    const auto j = k + static_cast<int>(rng.index(static_cast<std::size_t>(c - k)));
    std::swap(idx[k], idx[j]);
    out[k] = idx[k];
  }
  return out;
}

/// 6-RQSGD: one shot at each of six distinct coordinates, scaled by c/6.
inline RealVector estimate_rqsgd_six_gradient(const LayeredCircuit& circuit,
                                              std::span<const double> theta,
                                              std::span<const LabeledSample> samples,
                                              const Povm& povm,
                                              const LossFunction& loss, Rng& rng) {
  if (samples.size() < 6) throw Error("6-RQSGD: needs six samples");
  const int c = circuit.num_params();
  const auto coords = random_six_coords(c, rng);
  RealVector g = RealVector::Zero(c);
  for (int k = 0; k < 6; ++k) {
    g(coords[k]) = c / 6.0 *
                   estimate_partial(circuit, theta, coords[k], samples[k], povm, loss, rng);
  }
  return g;
}

// ----------------------------------------------------------------------------
// Stochastic training

enum class OptimizerKind { kQnscd2, kRqsgd2, kRqsgd6, kExactQngd, kExactGd };

inline std::string optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kQnscd2: return "2-QNSCD";
    case OptimizerKind::kRqsgd2: return "2-RQSGD";
    case OptimizerKind::kRqsgd6: return "6-RQSGD";
    case OptimizerKind::kExactQngd: return "exact-QNGD";
    case OptimizerKind::kExactGd: return "exact-GD";
  }
  return "?";
}

inline OptimizerKind optimizer_from_name(const std::string& s) {
  for (auto k : {OptimizerKind::kQnscd2, OptimizerKind::kRqsgd2,
                 OptimizerKind::kRqsgd6, OptimizerKind::kExactQngd,
                 OptimizerKind::kExactGd}) {
    if (s == optimizer_name(k)) return k;
  }
  if (s == "qnscd") return OptimizerKind::kQnscd2;
  if (s == "rqsgd2") return OptimizerKind::kRqsgd2;
  if (s == "rqsgd6") return OptimizerKind::kRqsgd6;
  throw Error("unknown optimizer: " + s);
}

inline constexpr int kSamplesPerIteration = 6;

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kQnscd2;
  double learning_rate = 2.5e-3;
  double beta = 0.7;
  int steps = 150;
  int batch_size = 600;  // samples per step; iterations per step = N/6
  std::uint64_t seed = 1;
  double estimator_scale = 1.0;  // global constant on the update direction
  int record_every = 0;          // iterations between trace rows; 0 = per step
  bool wall_clock = false;       // fill TraceRow::wall_ms (breaks byte-identity)
  std::optional<ParamVector> initial_theta;
};

struct TraceRow {
  int step;
  long iter;
  double emp_loss;
  double avg_exp_loss;
  double opt_loss;
  long samples;
  double wall_ms = 0.0;  // 0 unless OptimizerConfig::wall_clock
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  std::vector<ParamVector> snapshots;  // theta^(0) then one per step
  std::vector<std::string> events;
  long samples_consumed = 0;
  long iterations = 0;
};

// Rng stream tags; all streams derive from the run seed.
inline constexpr std::uint64_t kThetaStream = 0x7e7a;
inline constexpr std::uint64_t kShotStream = 0x5407;
inline constexpr std::uint64_t kEvalStream = 0xe7a1;

inline void validate_config(const OptimizerConfig& cfg, const LayeredCircuit& circuit) {
  if (!(cfg.learning_rate >= 0.0)) throw Error("learning rate must be >= 0");
  if (cfg.steps < 0) throw Error("steps must be >= 0");
  if (cfg.batch_size <= 0 || cfg.batch_size % kSamplesPerIteration != 0) {
    throw Error("batch size must be a positive multiple of 6");
  }
  if (!(cfg.estimator_scale > 0.0)) throw Error("estimator scale must be > 0");
  if (cfg.record_every < 0) throw Error("record_every must be >= 0");
  if (cfg.kind == OptimizerKind::kQnscd2) {
    const double threshold = min_beta(circuit.num_params());
    if (!(cfg.beta > threshold)) {
      throw Error("beta " + std::to_string(cfg.beta) +
                  " is not above min_beta(c) = " + std::to_string(threshold));
    }
  }
  if (cfg.initial_theta) check_params(circuit, *cfg.initial_theta);
}

namespace detail {

inline Batch slice(const Batch& batch, std::size_t from, std::size_t count) {
  return Batch(batch.begin() + from, batch.begin() + from + count);
}

inline LabeledEnsemble batch_ensemble(const Batch& batch) {
  std::vector<EnsembleMember> members;
  members.reserve(batch.size());
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) members.push_back({w, s.state, s.label});
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < members.size(); ++i) head += members[i].probability;
  members.back().probability = 1.0 - head;
  return LabeledEnsemble(std::move(members));
}

/// Moore-Penrose solve of a symmetric system; eigenvalues at or below
/// `threshold` are dropped. Returns true if any were dropped.
inline bool pinv_solve(const RealMatrix& f, const RealVector& g, double threshold,
                       RealVector& out) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(f);
  RealVector inv = es.eigenvalues();
  bool singular = false;
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (std::abs(inv(i)) > threshold) {
      inv(i) = 1.0 / inv(i);
    } else {
      inv(i) = 0.0;
      singular = true;
    }
  }
  out = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * g;
  return singular;
}

}  // namespace detail

inline constexpr double kPinvThreshold = 1e-10;

/// Runs any of the five optimizers on a PQC classification task. Data for
/// step s is stream.batch(s-1, N); each iteration consumes six consecutive
/// samples of it. Exact optimizers use the whole step batch per iteration.
inline TrainingTrace train(const LayeredCircuit& circuit,
                           const DatasetStream& stream, const Povm& povm,
                           const LossFunction& loss, const OptimizerConfig& cfg) {
  validate_config(cfg, circuit);
  const int c = circuit.num_params();
  Rng theta_rng(cfg.seed, kThetaStream);
  Rng rng(cfg.seed, kShotStream);
  Rng eval_rng(cfg.seed, kEvalStream);
  ParamVector theta = cfg.initial_theta ? *cfg.initial_theta
                                        : random_params(circuit, theta_rng);
  const int iters_per_step = cfg.batch_size / kSamplesPerIteration;
  const int record_every = cfg.record_every > 0 ? cfg.record_every : iters_per_step;
  const double eta = cfg.learning_rate * cfg.estimator_scale;

  TrainingTrace trace;
  trace.snapshots.push_back(theta);
  const auto start = std::chrono::steady_clock::now();
  for (int step = 1; step <= cfg.steps; ++step) {
    const Batch batch = stream.batch(static_cast<std::uint64_t>(step - 1),
                                     static_cast<std::size_t>(cfg.batch_size));
    const double opt = optimal_expected_loss(batch);
    std::optional<LabeledEnsemble> ensemble;
    if (cfg.kind == OptimizerKind::kExactQngd) {
      ensemble = detail::batch_ensemble(batch);
    }

    for (int it = 0; it < iters_per_step; ++it) {
      const auto offset = static_cast<std::size_t>(it * kSamplesPerIteration);
      const std::span<const LabeledSample> six(batch.data() + offset,
                                               kSamplesPerIteration);
      switch (cfg.kind) {
        case OptimizerKind::kQnscd2: {
          const CoordPair pair = random_coord_pair(circuit, rng);
          const SparseGradient g =
              estimate_pair_gradient(circuit, theta, pair, six.first(2), povm, loss, rng);
          const std::array<StateVector, 4> states = {six[2].state, six[3].state,
                                                     six[4].state, six[5].state};
          const Eigen::Matrix2d block =
              estimate_block(circuit, theta, pair, states, rng);
          theta = qnscd_step(theta, embed_regularize(block, pair, c, cfg.beta), g, eta);
          break;
        }
        case OptimizerKind::kRqsgd2: {
          const CoordPair pair = random_coord_pair(circuit, rng);
          const RealVector g =
              estimate_rqsgd_pair_gradient(circuit, theta, pair, six, povm, loss, rng);
          for (int k = 0; k < c; ++k) theta[k] -= eta * g(k);
          break;
        }
        case OptimizerKind::kRqsgd6: {
          const RealVector g =
              estimate_rqsgd_six_gradient(circuit, theta, six, povm, loss, rng);
          for (int k = 0; k < c; ++k) theta[k] -= eta * g(k);
          break;
        }
        case OptimizerKind::kExactGd:
        case OptimizerKind::kExactQngd: {
          const RealVector g = exact_expected_gradient(circuit, theta, povm, batch, loss);
          RealVector dir = g;
          if (cfg.kind == OptimizerKind::kExactQngd) {
            const RealMatrix f = exact_eqfim(circuit, theta, *ensemble);
            if (detail::pinv_solve(f, g, kPinvThreshold, dir)) {
              trace.events.push_back("step " + std::to_string(step) + " iter " +
                                     std::to_string(it) + ": singular metric, pseudo-inverse");
            }
          }
          for (int k = 0; k < c; ++k) theta[k] -= eta * dir(k);
          break;
        }
      }
      ++trace.iterations;
      trace.samples_consumed += kSamplesPerIteration;

      if ((it + 1) % record_every == 0 || it + 1 == iters_per_step) {
        trace.rows.push_back({step, trace.iterations,
                              empirical_loss(circuit, theta, povm, batch, eval_rng),
                              average_expected_loss(circuit, theta, povm, batch, loss),
                              opt, trace.samples_consumed});
        if (cfg.wall_clock) {
          trace.rows.back().wall_ms = std::chrono::duration<double, std::milli>(
                                          std::chrono::steady_clock::now() - start)
                                          .count();
        }
      }
    }
    trace.snapshots.push_back(theta);
  }
  return trace;
}

inline TrainingTrace run_2qnscd(const LayeredCircuit& circuit,
                                const DatasetStream& stream, const Povm& povm,
                                const LossFunction& loss, OptimizerConfig cfg) {
  cfg.kind = OptimizerKind::kQnscd2;
  return train(circuit, stream, povm, loss, cfg);
}

enum class RqsgdVariant { kPairsOf2, kSixCoords };

inline TrainingTrace run_rqsgd(const LayeredCircuit& circuit,
                               const DatasetStream& stream, const Povm& povm,
                               const LossFunction& loss, OptimizerConfig cfg,
                               RqsgdVariant variant) {
  cfg.kind = variant == RqsgdVariant::kPairsOf2 ? OptimizerKind::kRqsgd2
                                                : OptimizerKind::kRqsgd6;
  return train(circuit, stream, povm, loss, cfg);
}

// ----------------------------------------------------------------------------
// Deterministic reference optimizers on a generic landscape

struct ExactProblem {
  std::function<double(const ParamVector&)> loss;
  std::function<RealVector(const ParamVector&)> gradient;
  std::function<RealMatrix(const ParamVector&)> metric;  // optional
  // Optional replacement for F^{-1} grad (e.g. an analytic inverse). Returns
  // nullopt to fall back to the generic pseudo-inverse.
  std::function<std::optional<RealVector>(const ParamVector&, const RealVector&,
                                          std::vector<std::string>&)>
      natural_direction;
  // Optional projection back onto the domain after each step.
  std::function<void(ParamVector&, std::vector<std::string>&)> project;
};

struct PathTrace {
  std::vector<ParamVector> path;  // theta^(0..steps)
  std::vector<double> loss;       // loss along the path
  std::vector<std::string> events;
};

namespace detail {

inline PathTrace run_exact(const ExactProblem& problem, ParamVector theta,
                           double eta, int steps, bool natural) {
  if (!problem.loss || !problem.gradient) throw Error("exact run: incomplete problem");
  if (natural && !problem.metric && !problem.natural_direction) {
    throw Error("exact-QNGD: no metric provider");
  }
  PathTrace trace;
  trace.path.push_back(theta);
  trace.loss.push_back(problem.loss(theta));
  for (int t = 0; t < steps; ++t) {
    const RealVector g = problem.gradient(theta);
    RealVector dir = g;
    if (natural) {
      std::optional<RealVector> d;
      if (problem.natural_direction) d = problem.natural_direction(theta, g, trace.events);
      if (d) {
        dir = *d;
      } else if (pinv_solve(problem.metric(theta), g, kPinvThreshold, dir)) {
        trace.events.push_back("iter " + std::to_string(t) +
                               ": singular metric, pseudo-inverse");
      }
    }
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= eta * dir(k);
    if (problem.project) problem.project(theta, trace.events);
    trace.path.push_back(theta);
    trace.loss.push_back(problem.loss(theta));
  }
  return trace;
}

}  // namespace detail

/// theta <- theta - eta F(theta)^{-1} grad L(theta).
inline PathTrace run_exact_qngd(const ExactProblem& problem, ParamVector theta0,
                                double eta, int steps) {
  return detail::run_exact(problem, std::move(theta0), eta, steps, true);
}

inline PathTrace run_exact_gd(const ExactProblem& problem, ParamVector theta0,
                              double eta, int steps) {
  return detail::run_exact(problem, std::move(theta0), eta, steps, false);
}

/// Exact landscape of a PQC on a fixed batch: average expected loss, its
/// gradient and the batch E-QFIM.
inline ExactProblem pqc_exact_problem(const LayeredCircuit& circuit,
                                      const Povm& povm, const Batch& batch,
                                      const LossFunction& loss) {
  auto ensemble = std::make_shared<LabeledEnsemble>(detail::batch_ensemble(batch));
  ExactProblem p;
  p.loss = [=](const ParamVector& t) {
    return average_expected_loss(circuit, t, povm, batch, loss);
  };
  p.gradient = [=](const ParamVector& t) {
    return exact_expected_gradient(circuit, t, povm, batch, loss);
  };
  p.metric = [=](const ParamVector& t) { return exact_eqfim(circuit, t, *ensemble); };
  return p;
}

}  // namespace qnscd

#endif  // QNSCD_OPTIMIZER_HPP_
