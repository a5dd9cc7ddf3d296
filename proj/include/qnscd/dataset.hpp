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

// Synthetic three-class dataset, readout POVMs and CSV export.

#ifndef QNSCD_DATASET_HPP_
#define QNSCD_DATASET_HPP_

#include <bit>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <vector>

#include "qnscd/loss.hpp"
#include "qnscd/simcore.hpp"

namespace qnscd {

enum class DatasetClass { kPhi1 = 1, kPhi2 = 2, kPhi3 = 3 };

/// Builds phi_k(u) for a given weight vector u of length 2^(d-1).
///   phi_1: u_j at index 2j
///   phi_2: (-1)^(j mod 2 + 1) u_j at index 2j + [j even]
///   phi_3: u_j at index 2j + [j even]
inline StateVector dataset_state(int num_qubits, DatasetClass cls,
                                 std::span<const double> u) {
  if (num_qubits < 2) throw Error("dataset: need at least two qubits");
  const std::size_t half = std::size_t{1} << (num_qubits - 1);
  if (u.size() != half) throw Error("dataset: weight vector has wrong length");
  std::vector<Complex> amps(half * 2, Complex(0.0));
  for (std::size_t j = 0; j < half; ++j) {
    const bool even = j % 2 == 0;
    switch (cls) {
      case DatasetClass::kPhi1:
        amps[2 * j] = u[j];
        break;
      case DatasetClass::kPhi2:
        amps[2 * j + (even ? 1 : 0)] = even ? -u[j] : u[j];
        break;
      case DatasetClass::kPhi3:
        amps[2 * j + (even ? 1 : 0)] = u[j];
        break;
    }
  }
  return StateVector::normalized(std::move(amps));
}

inline int dataset_label(DatasetClass cls) {
  return cls == DatasetClass::kPhi1 ? +1 : -1;
}

/// One draw: u uniform on [0,1]^(2^(d-1)), class uniform over the three.
inline LabeledSample generate_sample(int num_qubits, Rng& rng) {
  if (num_qubits < 2) throw Error("dataset: need at least two qubits");
  std::vector<double> u(std::size_t{1} << (num_qubits - 1));
  for (auto& x : u) x = rng.uniform();
  const auto cls = static_cast<DatasetClass>(1 + rng.index(3));
  return {dataset_state(num_qubits, cls, u), dataset_label(cls)};
}

/// Lazily generated, replayable dataset. Batch k is a pure function of
/// (seed, k, batch_size).
class DatasetStream {
 public:
  DatasetStream(int num_qubits, std::uint64_t seed)
      : num_qubits_(num_qubits), root_(seed, 0x0da7a) {
    if (num_qubits < 2) throw Error("dataset: need at least two qubits");
  }

  Batch batch(std::uint64_t index, std::size_t size) const {
    Rng rng = root_.split(index);
    Batch out;
    out.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
      out.push_back(generate_sample(num_qubits_, rng));
    }
    return out;
  }

  int num_qubits() const { return num_qubits_; }

 private:
  int num_qubits_;
  Rng root_;
};

/// Lambda_{+1} = projector onto basis states with an even number of ones
/// (d = 3) or an even decimal index (d >= 4); Lambda_{-1} = I - Lambda_{+1}.
inline Povm parity_povm(int num_qubits) {
  if (num_qubits < 1) throw Error("parity_povm: bad qubit count");
  const auto dim = Eigen::Index{1} << num_qubits;
  Matrix plus = Matrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const bool positive =
        num_qubits == 3 ? std::popcount(static_cast<unsigned>(j)) % 2 == 0
                        : j % 2 == 0;
    if (positive) plus(j, j) = 1.0;
  }
  Matrix minus = Matrix::Identity(dim, dim) - plus;
  return Povm({{+1, std::move(plus)}, {-1, std::move(minus)}});
}

/// Helstrom measurement for a batch: Lambda_{+1} projects onto the positive
/// eigenspace of the signed mean operator.
inline Povm helstrom_povm(const Batch& batch) {
  const Matrix m = signed_mean_operator(batch);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const Eigen::Index dim = m.rows();
  Matrix plus = Matrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (es.eigenvalues()(k) > 0.0) {
      const Eigen::VectorXcd v = es.eigenvectors().col(k);
      plus += v * v.adjoint();
    }
  }
  plus = 0.5 * (plus + plus.adjoint());
  Matrix minus = Matrix::Identity(dim, dim) - plus;
  return Povm({{+1, std::move(plus)}, {-1, std::move(minus)}}, 1e-9);
}

inline void write_dataset_csv_header(std::ostream& out, int num_qubits) {
  out << "# qnscd dataset v1\n";
  out << "batch,index,label";
  for (std::size_t k = 0; k < (std::size_t{1} << num_qubits); ++k) {
    out << ",re" << k << ",im" << k;
  }
  out << '\n';
}

inline void write_dataset_csv_rows(std::ostream& out, std::uint64_t batch_index,
                                   const Batch& batch) {
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out << batch_index << ',' << i << ',' << batch[i].label;
    for (const auto& a : batch[i].state.amplitudes()) {
      out << ',' << a.real() << ',' << a.imag();
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace qnscd

#endif  // QNSCD_DATASET_HPP_
