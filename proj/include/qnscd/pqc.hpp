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

// Layered parameterized circuits U(theta) = V_L U_L(theta_L) ... V_1 U_1(theta_1)
// where U_a applies one Pauli rotation per qubit and V_a is a fixed list of
// CNOTs. Layers and qubits are 1-based; flattened coordinates are 0-based with
// coordinate i living on layer i/d + 1, qubit i%d + 1.

#ifndef QNSCD_PQC_HPP_
#define QNSCD_PQC_HPP_

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qnscd/simcore.hpp"

namespace qnscd {

struct Cnot {
  int control;
  int target;
  friend bool operator==(const Cnot&, const Cnot&) = default;
};

struct Layer {
  std::vector<Pauli> axes;     // one per qubit
  std::vector<Cnot> entangler;  // applied in order after the rotations
};

using ParamVector = std::vector<double>;

struct LayerQubit {
  int layer;
  int qubit;
};

class LayeredCircuit {
 public:
  LayeredCircuit(int num_qubits, std::vector<Layer> layers)
      : num_qubits_(num_qubits), layers_(std::move(layers)) {
    if (num_qubits_ < 1) throw Error("LayeredCircuit: need at least one qubit");
    if (layers_.empty()) throw Error("LayeredCircuit: need at least one layer");
    for (const auto& layer : layers_) {
      if (static_cast<int>(layer.axes.size()) != num_qubits_) {
        throw Error("LayeredCircuit: layer must list one axis per qubit");
      }
      for (const auto& g : layer.entangler) {
        if (g.control < 1 || g.control > num_qubits_ || g.target < 1 ||
            g.target > num_qubits_) {
          throw Error("LayeredCircuit: CNOT qubit out of range");
        }
        if (g.control == g.target) {
          throw Error("LayeredCircuit: CNOT control equals target");
        }
      }
    }
  }

  int num_qubits() const { return num_qubits_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  int num_params() const { return num_qubits_ * num_layers(); }

  /// 1-based layer access.
  const Layer& layer(int a) const {
    if (a < 1 || a > num_layers()) throw Error("layer index out of range");
    return layers_[a - 1];
  }
  const std::vector<Layer>& layers() const { return layers_; }

  LayerQubit locate(int coord) const {
    if (coord < 0 || coord >= num_params()) {
      throw Error("coordinate out of range");
    }
    return {coord / num_qubits_ + 1, coord % num_qubits_ + 1};
  }

  Pauli axis(int coord) const {
    const auto lq = locate(coord);
    return layers_[lq.layer - 1].axes[lq.qubit - 1];
  }

  friend bool operator==(const LayeredCircuit& a, const LayeredCircuit& b) {
    if (a.num_qubits_ != b.num_qubits_ || a.layers_.size() != b.layers_.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
      if (a.layers_[i].axes != b.layers_[i].axes ||
          a.layers_[i].entangler != b.layers_[i].entangler) {
        return false;
      }
    }
    return true;
  }

 private:
  int num_qubits_;
  std::vector<Layer> layers_;
};

/// Pair of distinct flattened coordinates with first's layer <= second's
/// layer (qubit index breaks ties).
class CoordPair {
 public:
  CoordPair(int i, int j, const LayeredCircuit& circuit) {
    if (i == j) throw Error("CoordPair: coordinates must differ");
    const auto li = circuit.locate(i);
    const auto lj = circuit.locate(j);
    const bool swap = lj.layer < li.layer ||
                      (lj.layer == li.layer && lj.qubit < li.qubit);
    first_ = swap ? j : i;
    second_ = swap ? i : j;
  }

  int first() const { return first_; }
  int second() const { return second_; }

 private:
  int first_;
  int second_;
};

/// Uniform over the c(c-1) ordered pairs, then normalized.
inline CoordPair random_coord_pair(const LayeredCircuit& circuit, Rng& rng) {
  const auto c = static_cast<std::size_t>(circuit.num_params());
  if (c < 2) throw Error("random_coord_pair: need at least two parameters");
  const auto i = static_cast<int>(rng.index(c));
  auto j = static_cast<int>(rng.index(c - 1));
  if (j >= i) ++j;
  return CoordPair(i, j, circuit);
}

inline ParamVector random_params(const LayeredCircuit& circuit, Rng& rng) {
  ParamVector theta(circuit.num_params());
  for (auto& t : theta) t = rng.uniform(0.0, 2.0 * kPi);
  return theta;
}

// ----------------------------------------------------------------------------
// Evaluation

inline void check_params(const LayeredCircuit& circuit,
                         std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != circuit.num_params()) {
    throw Error("parameter vector length does not match circuit");
  }
}

/// Applies layer a (rotations, then entangler) to qubits 1..d of `state`. The
/// register may carry extra trailing qubits (e.g. an ancilla).
inline void apply_layer(const LayeredCircuit& circuit,
                        std::span<const double> theta, int a,
                        StateVector& state) {
  const Layer& layer = circuit.layer(a);
  const int d = circuit.num_qubits();
  for (int p = 1; p <= d; ++p) {
    apply_pauli_rotation(state, p, layer.axes[p - 1], theta[(a - 1) * d + p - 1]);
  }
  for (const auto& g : layer.entangler) apply_cnot(state, g.control, g.target);
}

/// Applies layers from_layer .. to_layer_exclusive-1 in order.
inline void forward_range(const LayeredCircuit& circuit,
                          std::span<const double> theta, StateVector& state,
                          int from_layer, int to_layer_exclusive) {
  check_params(circuit, theta);
  if (state.num_qubits() < circuit.num_qubits()) {
    throw Error("forward: state has fewer qubits than the circuit");
  }
  if (from_layer < 1 || from_layer > to_layer_exclusive ||
      to_layer_exclusive > circuit.num_layers() + 1) {
    throw Error("forward_range: invalid layer range");
  }
  for (int a = from_layer; a < to_layer_exclusive; ++a) {
    apply_layer(circuit, theta, a, state);
  }
}

inline void forward(const LayeredCircuit& circuit,
                    std::span<const double> theta, StateVector& state) {
  forward_range(circuit, theta, state, 1, circuit.num_layers() + 1);
}

inline StateVector forward_copy(const LayeredCircuit& circuit,
                                std::span<const double> theta,
                                StateVector state) {
  forward(circuit, theta, state);
  return state;
}

/// Dense matrix of layers from_layer .. to_layer_exclusive-1 (oracle).
inline Matrix dense_unitary(const LayeredCircuit& circuit,
                            std::span<const double> theta, int from_layer,
                            int to_layer_exclusive) {
  const int d = circuit.num_qubits();
  const auto dim = Eigen::Index{1} << d;
  Matrix u(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    StateVector s = StateVector::basis(d, static_cast<std::size_t>(col));
    forward_range(circuit, theta, s, from_layer, to_layer_exclusive);
    u.col(col) = s.to_eigen();
  }
  return u;
}

inline Matrix dense_unitary(const LayeredCircuit& circuit,
                            std::span<const double> theta) {
  return dense_unitary(circuit, theta, 1, circuit.num_layers() + 1);
}

/// Upsilon_coord = W^dag (sigma/2 on qubit p) W, W = layers 1..a-1.
inline HermitianOp upsilon(const LayeredCircuit& circuit,
                           std::span<const double> theta, int coord) {
  const auto lq = circuit.locate(coord);
  const Matrix w = dense_unitary(circuit, theta, 1, lq.layer);
  const Matrix half_sigma =
      0.5 * embed_1q(circuit.num_qubits(), lq.qubit, pauli_matrix(circuit.axis(coord)));
  const Matrix ups = w.adjoint() * half_sigma * w;
  return HermitianOp(0.5 * (ups + ups.adjoint()), 1e-9);
}

// ----------------------------------------------------------------------------
// Published circuits and the text format

inline Layer uniform_layer(int d, Pauli axis, std::vector<Cnot> entangler = {}) {
  return Layer{std::vector<Pauli>(d, axis), std::move(entangler)};
}

inline const std::vector<std::string>& builtin_circuit_names() {
  static const std::vector<std::string> names = {"Q3L3", "Q4L4", "Q5P1",
                                                 "Q5P2", "Q6P1", "Q6P2"};
  return names;
}

/// The six circuits used in the experiments. Diagrams with an R_Y column
/// followed by an R_Z column are modelled as two layers, the first with an
/// empty entangler.
inline LayeredCircuit builtin_circuit(std::string_view name) {
  constexpr Pauli Y = Pauli::Y;
  constexpr Pauli Z = Pauli::Z;
  if (name == "Q3L3") {
    const std::vector<Cnot> ent = {{1, 2}, {2, 3}};
    return LayeredCircuit(3, {uniform_layer(3, Y, ent), uniform_layer(3, Y, ent),
                              uniform_layer(3, Y, ent)});
  }
  if (name == "Q4L4") {
    return LayeredCircuit(
        4, {uniform_layer(4, Y),
            uniform_layer(4, Z, {{1, 2}, {3, 4}, {2, 3}, {4, 1}}),
            uniform_layer(4, Y), uniform_layer(4, Z, {{1, 3}, {4, 2}})});
  }
  if (name == "Q5P1") {
    return LayeredCircuit(
        5, {uniform_layer(5, Y), uniform_layer(5, Z, {{2, 3}, {4, 5}}),
            uniform_layer(5, Y), uniform_layer(5, Z, {{1, 2}, {3, 4}, {5, 1}}),
            uniform_layer(5, Y), uniform_layer(5, Z, {{2, 3}, {4, 5}})});
  }
  if (name == "Q5P2") {
    return LayeredCircuit(
        5, {uniform_layer(5, Y), uniform_layer(5, Z),
            uniform_layer(5, Y, {{2, 3}, {4, 5}, {1, 2}, {3, 4}, {5, 1}}),
            uniform_layer(5, Z), uniform_layer(5, Y), uniform_layer(5, Z)});
  }
  if (name == "Q6P1") {
    return LayeredCircuit(
        6, {uniform_layer(6, Y), uniform_layer(6, Z, {{1, 2}, {3, 4}, {5, 6}}),
            uniform_layer(6, Y), uniform_layer(6, Z, {{2, 3}, {4, 5}, {6, 1}}),
            uniform_layer(6, Y), uniform_layer(6, Z, {{1, 2}, {3, 4}, {5, 6}})});
  }
  if (name == "Q6P2") {
    return LayeredCircuit(
        6, {uniform_layer(6, Y), uniform_layer(6, Z), uniform_layer(6, Y),
            uniform_layer(6, Z, {{1, 2}, {3, 4}, {5, 6}, {2, 3}, {4, 5}, {6, 1}}),
            uniform_layer(6, Y), uniform_layer(6, Z), uniform_layer(6, Y),
            uniform_layer(6, Z)});
  }
  throw Error("unknown builtin circuit '" + std::string(name) + "'");
}

/// One layer per line: `axes=YZY ; cnots=(1,2)(2,3)`. Blank lines and lines
/// starting with '#' are skipped. Qubits are 1-based.
inline LayeredCircuit parse_circuit(std::string_view text) {
  std::vector<Layer> layers;
  int d = -1;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error("circuit line " + std::to_string(line_no) + ": " + what);
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    Layer layer;
    bool have_axes = false;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ';')) {
      field = trim(field);
      if (field.empty()) continue;
      const auto eq = field.find('=');
      if (eq == std::string::npos) fail("expected key=value");
      const std::string key = trim(field.substr(0, eq));
      const std::string value = trim(field.substr(eq + 1));
      if (key == "axes") {
        for (char ch : value) {
          if (std::isspace(static_cast<unsigned char>(ch))) continue;
          layer.axes.push_back(pauli_from_char(ch));
        }
        have_axes = true;
      } else if (key == "cnots") {
        std::size_t pos = 0;
        while (pos < value.size()) {
          if (std::isspace(static_cast<unsigned char>(value[pos]))) {
            ++pos;
            continue;
          }
          if (value[pos] != '(') fail("malformed cnot list");
          const auto close = value.find(')', pos);
          if (close == std::string::npos) fail("unterminated cnot");
          const std::string body = value.substr(pos + 1, close - pos - 1);
          const auto comma = body.find(',');
          if (comma == std::string::npos) fail("cnot needs control,target");
          try {
            layer.entangler.push_back(
                {std::stoi(body.substr(0, comma)), std::stoi(body.substr(comma + 1))});
          } catch (const std::exception&) {
            fail("cnot indices must be integers");
          }
          pos = close + 1;
        }
      } else {
        fail("unknown key '" + key + "'");
      }
    }
    if (!have_axes) fail("missing axes=");
    if (d < 0) d = static_cast<int>(layer.axes.size());
    if (static_cast<int>(layer.axes.size()) != d) fail("inconsistent qubit count");
    layers.push_back(std::move(layer));
  }
  if (layers.empty()) throw Error("circuit description has no layers");
  return LayeredCircuit(d, std::move(layers));
}

inline std::string format_circuit(const LayeredCircuit& circuit) {
  std::ostringstream out;
  for (const auto& layer : circuit.layers()) {
    out << "axes=";
    for (Pauli p : layer.axes) out << pauli_char(p);
    out << " ; cnots=";
    for (const auto& g : layer.entangler) {
      out << '(' << g.control << ',' << g.target << ')';
    }
    out << '\n';
  }
  return out.str();
}

inline LayeredCircuit load_circuit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open circuit file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_circuit(buf.str());
}

/// Builtin name or path to a circuit description file.
inline LayeredCircuit resolve_circuit(const std::string& name_or_path) {
  for (const auto& n : builtin_circuit_names()) {
    if (n == name_or_path) return builtin_circuit(n);
  }
  return load_circuit_file(name_or_path);
}

}  // namespace qnscd

#endif  // QNSCD_PQC_HPP_
