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

// Dense statevector simulation.
//
// Bit convention (used by every module): for a register of d qubits, qubit 1
// is the most significant bit of the basis-state index and qubit d the least
// significant one, i.e. |q_1 q_2 ... q_d> has index sum_k q_k 2^(d-k). A
// single-qubit operator on qubit p therefore reads
// I^{(x)(p-1)} (x) sigma (x) I^{(x)(d-p)} as a dense matrix.

#ifndef QNSCD_SIMCORE_HPP_
#define QNSCD_SIMCORE_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qnscd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Thrown on contract violations (bad dimensions, invalid operators, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kStructuralTol = 1e-10;
inline constexpr double kDecompositionTol = 1e-8;
inline constexpr double kPi = 3.14159265358979323846;

enum class Pauli : std::uint8_t { X, Y, Z };

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'X': case 'x': return Pauli::X;
    case 'Y': case 'y': return Pauli::Y;
    case 'Z': case 'z': return Pauli::Z;
    default: break;
  }
  throw Error(std::string("unknown Pauli axis '") + c + "'");
}

inline Matrix2 pauli_matrix(Pauli p) {
  const Complex i(0.0, 1.0);
  Matrix2 m;
  switch (p) {
    case Pauli::X: m << 0.0, 1.0, 1.0, 0.0; break;
    case Pauli::Y: m << 0.0, -i, i, 0.0; break;
    case Pauli::Z: m << 1.0, 0.0, 0.0, -1.0; break;
  }
  return m;
}

/// exp(-i angle sigma / 2) = cos(angle/2) I - i sin(angle/2) sigma.
inline Matrix2 rotation_matrix(Pauli axis, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  return c * Matrix2::Identity() + Complex(0.0, -s) * pauli_matrix(axis);
}

// ----------------------------------------------------------------------------
// Random numbers

/// Seedable, splittable generator. Streams derived with split() are
/// statistically independent and fully determined by (seed, stream path).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : seed_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))),
        engine_(seed_) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw Error("Rng::index: empty range");
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    // Box-Muller; portable across standard libraries.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  Rng split(std::uint64_t stream) const { return Rng(seed_, stream); }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// ----------------------------------------------------------------------------
// StateVector

class StateVector {
 public:
  /// |0...0> on num_qubits qubits.
  explicit StateVector(int num_qubits = 1) : num_qubits_(num_qubits) {
    if (num_qubits < 1 || num_qubits > 20) {
      throw Error("StateVector: qubit count out of range");
    }
    amps_.assign(std::size_t{1} << num_qubits, Complex(0.0));
    amps_[0] = 1.0;
  }

  static StateVector basis(int num_qubits, std::size_t index) {
    StateVector s(num_qubits);
    if (index >= s.dim()) throw Error("StateVector::basis: index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
  }

  /// Takes ownership of amplitudes; rejects non power-of-two lengths and
  /// vectors whose norm deviates from 1 by more than tol.
  static StateVector from_amplitudes(std::vector<Complex> amps,
                                     double tol = kStructuralTol) {
    const std::size_t n = amps.size();
    if (n < 2 || (n & (n - 1)) != 0) {
      throw Error("StateVector: length must be a power of two >= 2");
    }
    StateVector s(1);
    s.num_qubits_ = static_cast<int>(std::countr_zero(n));
    s.amps_ = std::move(amps);
    if (std::abs(s.norm_squared() - 1.0) > tol) {
      throw Error("StateVector: amplitudes are not normalized");
    }
    return s;
  }

  /// Normalizes an arbitrary nonzero vector.
  static StateVector normalized(std::vector<Complex> amps) {
    double n2 = 0.0;
    for (const auto& a : amps) n2 += std::norm(a);
    if (n2 <= 0.0) throw Error("StateVector: zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amps) a *= inv;
    return from_amplitudes(std::move(amps), 1e-9);
  }

  int num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amps_.size(); }

  std::span<const Complex> amplitudes() const { return amps_; }
  std::span<Complex> mutable_amplitudes() { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const {
    double n2 = 0.0;
    for (const auto& a : amps_) n2 += std::norm(a);
    return n2;
  }

  /// Rescales to unit norm; returns the squared norm before rescaling.
  double renormalize() {
    const double n2 = norm_squared();
    if (n2 < 1e-28) throw Error("StateVector: cannot renormalize a null vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amps_) a *= inv;
    return n2;
  }

  Eigen::VectorXcd to_eigen() const {
    return Eigen::Map<const Eigen::VectorXcd>(amps_.data(),
                                              static_cast<Eigen::Index>(dim()));
  }

  static StateVector from_eigen(const Eigen::VectorXcd& v) {
    return from_amplitudes(std::vector<Complex>(v.data(), v.data() + v.size()),
                           1e-9);
  }

 private:
  int num_qubits_;
  std::vector<Complex> amps_;
};

inline Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw Error("inner_product: dimension mismatch");
  Complex acc(0.0);
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

/// Bit mask of a 1-based qubit under the most-significant-first convention.
inline std::size_t qubit_mask(int num_qubits, int qubit) {
  if (qubit < 1 || qubit > num_qubits) throw Error("qubit index out of range");
  return std::size_t{1} << (num_qubits - qubit);
}

/// Haar-random pure state (normalized complex Gaussian vector).
inline StateVector random_state(int num_qubits, Rng& rng) {
  std::vector<Complex> amps(std::size_t{1} << num_qubits);
  for (auto& a : amps) a = Complex(rng.normal(), rng.normal());
  return StateVector::normalized(std::move(amps));
}

/// True when b = e^{i delta} a for some delta. The phase is fixed on the
/// largest-magnitude amplitude of a.
inline bool equal_up_to_global_phase(const StateVector& a, const StateVector& b,
                                     double tol = 1e-9) {
  if (a.dim() != b.dim()) return false;
  std::size_t k = 0;
  for (std::size_t i = 1; i < a.dim(); ++i) {
    if (std::abs(a[i]) > std::abs(a[k])) k = i;
  }
  if (std::abs(b[k]) < 1e-14) return false;
  const Complex phase = (b[k] / std::abs(b[k])) / (a[k] / std::abs(a[k]));
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (std::abs(b[i] - phase * a[i]) > tol) return false;
  }
  return true;
}

// ----------------------------------------------------------------------------
// Unitary application (in place, stride arithmetic)

namespace detail {

inline bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()))
             .cwiseAbs()
             .maxCoeff() <= tol;
}

/// Applies an arbitrary 2x2 matrix on one qubit; no unitarity check.
inline void apply_matrix_1q(StateVector& state, int qubit, const Matrix2& m) {
  const std::size_t mask = qubit_mask(state.num_qubits(), qubit);
  auto amps = state.mutable_amplitudes();
  const Complex m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) continue;
    const Complex a0 = amps[i];
    const Complex a1 = amps[i | mask];
    amps[i] = m00 * a0 + m01 * a1;
    amps[i | mask] = m10 * a0 + m11 * a1;
  }
}

}  // namespace detail

/// Single-qubit gate fast path.
inline void apply_1q(StateVector& state, int qubit, const Matrix2& u) {
  if (!detail::is_unitary(u, kStructuralTol)) {
    throw Error("apply_1q: matrix is not unitary");
  }
  detail::apply_matrix_1q(state, qubit, u);
}

/// Applies u on the branch where `control` equals control_value (0 or 1).
inline void apply_controlled_1q(StateVector& state, int control,
                                int control_value, int target,
                                const Matrix2& u) {
  if (control == target) throw Error("controlled gate: control == target");
  if (!detail::is_unitary(u, kStructuralTol)) {
    throw Error("apply_controlled_1q: matrix is not unitary");
  }
  const std::size_t cmask = qubit_mask(state.num_qubits(), control);
  const std::size_t tmask = qubit_mask(state.num_qubits(), target);
  const std::size_t want = control_value ? cmask : 0;
  auto amps = state.mutable_amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & tmask) || (i & cmask) != want) continue;
    const Complex a0 = amps[i];
    const Complex a1 = amps[i | tmask];
    amps[i] = u(0, 0) * a0 + u(0, 1) * a1;
    amps[i | tmask] = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

inline void apply_cnot(StateVector& state, int control, int target) {
  if (control == target) throw Error("CNOT: control == target");
  const std::size_t cmask = qubit_mask(state.num_qubits(), control);
  const std::size_t tmask = qubit_mask(state.num_qubits(), target);
  auto amps = state.mutable_amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & cmask) && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
  }
}

/// Applies a 2^k x 2^k unitary to the listed (distinct, 1-based) qubits. The
/// first listed qubit is the most significant bit of the operator's index.
inline void apply_unitary(StateVector& state, std::span<const int> qubits,
                          const Matrix& u) {
  const int k = static_cast<int>(qubits.size());
  if (k < 1 || u.rows() != (Eigen::Index{1} << k)) {
    throw Error("apply_unitary: operator size does not match qubit count");
  }
  if (!detail::is_unitary(u, kStructuralTol)) {
    throw Error("apply_unitary: operator is not unitary");
  }
  std::vector<std::size_t> masks(k);
  std::size_t all = 0;
  for (int j = 0; j < k; ++j) {
    masks[j] = qubit_mask(state.num_qubits(), qubits[j]);
    if (all & masks[j]) throw Error("apply_unitary: repeated qubit");
    all |= masks[j];
  }
  const std::size_t sub = std::size_t{1} << k;
  std::vector<std::size_t> offsets(sub, 0);
  for (std::size_t r = 0; r < sub; ++r) {
    for (int j = 0; j < k; ++j) {
      if (r & (std::size_t{1} << (k - 1 - j))) offsets[r] |= masks[j];
    }
  }
  auto amps = state.mutable_amplitudes();
  std::vector<Complex> in(sub);
  for (std::size_t base = 0; base < amps.size(); ++base) {
    if (base & all) continue;
    for (std::size_t r = 0; r < sub; ++r) in[r] = amps[base | offsets[r]];
    for (std::size_t r = 0; r < sub; ++r) {
      Complex acc(0.0);
      for (std::size_t s = 0; s < sub; ++s) {
        acc += u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) *
               in[s];
      }
      amps[base | offsets[r]] = acc;
    }
  }
}

inline void apply_pauli_rotation(StateVector& state, int qubit, Pauli axis,
                                 double angle) {
  if (!std::isfinite(angle)) throw Error("rotation angle is not finite");
  detail::apply_matrix_1q(state, qubit, rotation_matrix(axis, angle));
}

inline void apply_pauli(StateVector& state, int qubit, Pauli axis) {
  detail::apply_matrix_1q(state, qubit, pauli_matrix(axis));
}

// ----------------------------------------------------------------------------
// Measurements

/// <state| sigma_axis on qubit |state>.
inline double pauli_expectation(const StateVector& state, int qubit,
                                Pauli axis) {
  const std::size_t mask = qubit_mask(state.num_qubits(), qubit);
  const auto amps = state.amplitudes();
  double acc = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) continue;
    const Complex a0 = amps[i];
    const Complex a1 = amps[i | mask];
    switch (axis) {
      case Pauli::Z: acc += std::norm(a0) - std::norm(a1); break;
      case Pauli::X: acc += 2.0 * (std::conj(a0) * a1).real(); break;
      case Pauli::Y: acc += 2.0 * (std::conj(a0) * a1).imag(); break;
    }
  }
  return acc;
}

/// Projective measurement of sigma_axis on one qubit. Returns the +-1
/// outcome and collapses `state` onto the matching eigenspace.
inline int measure_pauli(StateVector& state, int qubit, Pauli axis, Rng& rng) {
  const double p_plus =
      std::clamp(0.5 * (1.0 + pauli_expectation(state, qubit, axis)), 0.0, 1.0);
  const int outcome = rng.uniform() < p_plus ? +1 : -1;
  const double p = outcome > 0 ? p_plus : 1.0 - p_plus;
  if (p < 1e-14) throw Error("measure_pauli: sampled a null branch");
  const Matrix2 projector =
      0.5 * (Matrix2::Identity() + double(outcome) * pauli_matrix(axis));
  detail::apply_matrix_1q(state, qubit, projector);
  state.renormalize();
  return outcome;
}

/// Measures `qubit` in the computational basis and removes it from the
/// register. Returns the bit value (0 or 1) and the reduced state.
inline std::pair<int, StateVector> measure_and_discard(const StateVector& state,
                                                       int qubit, Rng& rng) {
  if (state.num_qubits() < 2) throw Error("cannot discard the only qubit");
  StateVector work = state;
  const int outcome = measure_pauli(work, qubit, Pauli::Z, rng);
  const int bit = outcome > 0 ? 0 : 1;
  const int d = state.num_qubits();
  const std::size_t mask = qubit_mask(d, qubit);
  const std::size_t low_mask = mask - 1;
  std::vector<Complex> out(work.dim() / 2);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t hi = (j & ~low_mask) << 1;
    const std::size_t i = hi | (j & low_mask) | (bit ? mask : 0);
    out[j] = work[i];
  }
  return {bit, StateVector::normalized(std::move(out))};
}

// ----------------------------------------------------------------------------
// Operators (dense; oracle side)

inline bool is_hermitian(const Matrix& m, double tol = kStructuralTol) {
  return m.rows() == m.cols() &&
         (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Dense Hermitian operator.
class HermitianOp {
 public:
  explicit HermitianOp(Matrix m, double tol = kStructuralTol)
      : m_(std::move(m)) {
    if (!is_hermitian(m_, tol)) throw Error("HermitianOp: matrix not Hermitian");
  }
  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

/// Dense density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m, double tol = kStructuralTol)
      : m_(std::move(m)) {
    if (!is_hermitian(m_, tol)) throw Error("DensityMatrix: not Hermitian");
    if (std::abs(m_.trace() - Complex(1.0)) > tol) {
      throw Error("DensityMatrix: trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) {
      throw Error("DensityMatrix: negative eigenvalue");
    }
  }

  static DensityMatrix pure(const StateVector& s) {
    const Eigen::VectorXcd v = s.to_eigen();
    return DensityMatrix(v * v.adjoint());
  }

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

/// Full matrix of a single-qubit operator embedded at `qubit`.
inline Matrix embed_1q(int num_qubits, int qubit, const Matrix2& op) {
  if (qubit < 1 || qubit > num_qubits) throw Error("qubit index out of range");
  Matrix out = Matrix::Identity(1, 1);
  for (int q = 1; q <= num_qubits; ++q) {
    const Matrix factor = q == qubit ? Matrix(op) : Matrix(Matrix2::Identity());
    Matrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        next.block(2 * r, 2 * c, 2, 2) = out(r, c) * factor;
      }
    }
    out = std::move(next);
  }
  return out;
}

inline double expectation(const StateVector& state, const HermitianOp& obs) {
  if (obs.dim() != static_cast<Eigen::Index>(state.dim())) {
    throw Error("expectation: dimension mismatch");
  }
  const Eigen::VectorXcd v = state.to_eigen();
  const Complex e = v.dot(obs.matrix() * v);
  if (std::abs(e.imag()) > kStructuralTol) {
    throw Error("expectation: non-real result");
  }
  return e.real();
}

inline double expectation(const DensityMatrix& rho, const HermitianOp& obs) {
  if (obs.dim() != rho.dim()) throw Error("expectation: dimension mismatch");
  const Complex e = (obs.matrix() * rho.matrix()).trace();
  if (std::abs(e.imag()) > kStructuralTol) {
    throw Error("expectation: non-real result");
  }
  return e.real();
}

/// Projective measurement of an arbitrary Hermitian observable: samples an
/// eigenvalue (degenerate eigenvalues grouped within 1e-9) and collapses the
/// state onto the corresponding eigenspace.
inline double measure_observable(StateVector& state, const HermitianOp& obs,
                                 Rng& rng) {
  if (obs.dim() != static_cast<Eigen::Index>(state.dim())) {
    throw Error("measure_observable: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(obs.matrix());
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  const Eigen::VectorXcd psi = state.to_eigen();
  const Eigen::Index n = vals.size();
  // Group sorted eigenvalues into eigenspaces.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i + 1;
    while (j < n && vals(j) - vals(i) < 1e-9) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  std::vector<Eigen::VectorXcd> projections;
  std::vector<double> probs;
  for (const auto& [lo, hi] : groups) {
    const auto basis = vecs.middleCols(lo, hi - lo);
    Eigen::VectorXcd proj = basis * (basis.adjoint() * psi);
    probs.push_back(proj.squaredNorm());
    projections.push_back(std::move(proj));
  }
  double r = rng.uniform() * std::accumulate(probs.begin(), probs.end(), 0.0);
  std::size_t pick = 0;
  for (; pick + 1 < probs.size(); ++pick) {
    if (r < probs[pick]) break;
    r -= probs[pick];
  }
  if (probs[pick] < 1e-14) throw Error("measure_observable: null branch");
  state = StateVector::from_eigen(projections[pick] / std::sqrt(probs[pick]));
  return vals(groups[pick].first);
}

// ----------------------------------------------------------------------------
// POVMs

struct PovmElement {
  int label;
  Matrix op;
};

/// Finite POVM. Elements must be PSD and sum to the identity. Diagonal
/// elements take a fast path in probability evaluation.
class Povm {
 public:
  explicit Povm(std::vector<PovmElement> elements, double tol = kStructuralTol)
      : elements_(std::move(elements)) {
    if (elements_.empty()) throw Error("Povm: no elements");
    const Eigen::Index dim = elements_.front().op.rows();
    Matrix sum = Matrix::Zero(dim, dim);
    diagonal_ = true;
    for (const auto& e : elements_) {
      if (e.op.rows() != dim || e.op.cols() != dim) {
        throw Error("Povm: element dimension mismatch");
      }
      if (!is_hermitian(e.op, tol)) throw Error("Povm: element not Hermitian");
      Eigen::SelfAdjointEigenSolver<Matrix> es(e.op, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -tol) {
        throw Error("Povm: element not positive semidefinite");
      }
      Matrix off = e.op;
      off.diagonal().setZero();
      if (off.cwiseAbs().maxCoeff() > 0.0) diagonal_ = false;
      sum += e.op;
    }
    if ((sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > tol) {
      throw Error("Povm: elements do not sum to identity");
    }
  }

  const std::vector<PovmElement>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  Eigen::Index dim() const { return elements_.front().op.rows(); }

  /// Born-rule probabilities <state|Lambda_k|state>.
  std::vector<double> probabilities(const StateVector& state) const {
    if (static_cast<Eigen::Index>(state.dim()) != dim()) {
      throw Error("Povm: state dimension mismatch");
    }
    std::vector<double> probs(elements_.size());
    const auto amps = state.amplitudes();
    if (diagonal_) {
      for (std::size_t k = 0; k < elements_.size(); ++k) {
        double p = 0.0;
        const auto& op = elements_[k].op;
        for (std::size_t i = 0; i < amps.size(); ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          p += op(ii, ii).real() * std::norm(amps[i]);
        }
        probs[k] = std::max(p, 0.0);
      }
    } else {
      const Eigen::VectorXcd v = state.to_eigen();
      for (std::size_t k = 0; k < elements_.size(); ++k) {
        probs[k] = std::max(v.dot(elements_[k].op * v).real(), 0.0);
      }
    }
    return probs;
  }

 private:
  std::vector<PovmElement> elements_;
  bool diagonal_ = false;
};

/// Samples an outcome label with Born-rule probabilities (no collapse).
inline int measure_povm(const StateVector& state, const Povm& povm, Rng& rng) {
  const auto probs = povm.probabilities(state);
  double r = rng.uniform() * std::accumulate(probs.begin(), probs.end(), 0.0);
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    if (r < probs[k]) return povm.elements()[k].label;
    r -= probs[k];
  }
  return povm.elements().back().label;
}

// ----------------------------------------------------------------------------
// Ensembles and density-matrix utilities

struct EnsembleMember {
  double probability;
  StateVector state;
  int label = 0;
};

/// Finite ensemble {(Q_X(x), |phi_x>, y_x)}.
class LabeledEnsemble {
 public:
  explicit LabeledEnsemble(std::vector<EnsembleMember> members)
      : members_(std::move(members)) {
    if (members_.empty()) throw Error("LabeledEnsemble: empty");
    double total = 0.0;
    const std::size_t dim = members_.front().state.dim();
    for (const auto& m : members_) {
      if (m.probability < 0.0) throw Error("LabeledEnsemble: negative weight");
      if (m.state.dim() != dim) throw Error("LabeledEnsemble: mixed dimensions");
      total += m.probability;
    }
    if (std::abs(total - 1.0) > kStructuralTol) {
      throw Error("LabeledEnsemble: probabilities do not sum to 1");
    }
    cumulative_.reserve(members_.size());
    double acc = 0.0;
    for (const auto& m : members_) cumulative_.push_back(acc += m.probability);
  }

  const std::vector<EnsembleMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  int num_qubits() const { return members_.front().state.num_qubits(); }

  /// Index drawn with probability Q_X(x).
  std::size_t sample_index(Rng& rng) const {
    const double r = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    return std::min<std::size_t>(it - cumulative_.begin(), members_.size() - 1);
  }

  const EnsembleMember& sample(Rng& rng) const {
    return members_[sample_index(rng)];
  }

 private:
  std::vector<EnsembleMember> members_;
  std::vector<double> cumulative_;
};

/// Random ensemble of `count` Haar states with random weights and +-1 labels.
inline LabeledEnsemble random_ensemble(int num_qubits, int count, Rng& rng) {
  std::vector<double> w(count);
  for (auto& x : w) x = 0.1 + rng.uniform();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<EnsembleMember> members;
  for (int i = 0; i < count; ++i) {
    members.push_back({w[i] / total, random_state(num_qubits, rng),
                       rng.bernoulli(0.5) ? +1 : -1});
  }
  // Exact renormalization of the last weight keeps the sum at 1 to rounding.
  double head = 0.0;
  for (int i = 0; i + 1 < count; ++i) head += members[i].probability;
  members.back().probability = 1.0 - head;
  return LabeledEnsemble(std::move(members));
}

inline DensityMatrix ensemble_density(const LabeledEnsemble& ensemble) {
  const auto dim = static_cast<Eigen::Index>(ensemble.members().front().state.dim());
  Matrix rho = Matrix::Zero(dim, dim);
  for (const auto& m : ensemble.members()) {
    const Eigen::VectorXcd v = m.state.to_eigen();
    rho += m.probability * (v * v.adjoint());
  }
  return DensityMatrix(std::move(rho));
}

/// Sum of singular values.
inline double trace_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

/// Hermitian square root of a PSD matrix (negative eigenvalues clipped).
inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const RealVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

/// (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2, evaluated as the squared trace
/// norm of sqrt(rho1) sqrt(rho2). Rank-deficient inputs then lose no digits
/// to square roots of rounding-level eigenvalues.
inline double uhlmann_fidelity(const DensityMatrix& rho1,
                               const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) throw Error("uhlmann_fidelity: dimension mismatch");
  const double t = trace_norm(psd_sqrt(rho1.matrix()) * psd_sqrt(rho2.matrix()));
  return t * t;
}

}  // namespace qnscd

#endif  // QNSCD_SIMCORE_HPP_
