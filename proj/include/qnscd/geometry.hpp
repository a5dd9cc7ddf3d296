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

// Single-qubit landscape L(theta, phi) = <sigma_X> = cos(theta) cos(phi)
// used to contrast gradient descent with natural gradient descent, plus the
// polar-coordinate example for the quadratic geometric information bound.

#ifndef QNSCD_GEOMETRY_HPP_
#define QNSCD_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qnscd/optimizer.hpp"
#include "qnscd/simcore.hpp"

namespace qnscd {

/// Point of the demo domain 0 <= theta < pi, pi/2 <= phi <= 3pi/2.
struct PolarPoint {
  double theta;
  double phi;
};

inline bool in_demo_domain(const PolarPoint& p) {
  return p.theta >= 0.0 && p.theta < kPi && p.phi >= 0.5 * kPi &&
         p.phi <= 1.5 * kPi;
}

inline double demo_loss(const PolarPoint& p) {
  return std::cos(p.theta) * std::cos(p.phi);
}

inline Eigen::Vector2d demo_gradient(const PolarPoint& p) {
  return {-std::sin(p.theta) * std::cos(p.phi),
          -std::cos(p.theta) * std::sin(p.phi)};
}

/// Fubini-Study metric (1/4) diag(cos^2 phi, 1).
inline Eigen::Matrix2d fubini_study_demo_metric(const PolarPoint& p) {
  const double c = std::cos(p.phi);
  Eigen::Matrix2d f;
  f << 0.25 * c * c, 0.0, 0.0, 0.25;
  return f;
}

/// U(theta, phi) = [[cos(t/2), -e^{i phi} sin(t/2)], [sin(t/2), e^{i phi} cos(t/2)]].
inline Matrix2 demo_unitary(const PolarPoint& p) {
  const double c = std::cos(0.5 * p.theta), s = std::sin(0.5 * p.theta);
  const Complex e = std::polar(1.0, p.phi);
  Matrix2 u;
  u << c, -e * s, s, e * c;
  return u;
}

/// U(theta, phi)|+> through the simulator.
inline StateVector demo_state(const PolarPoint& p) {
  StateVector s = StateVector::basis(1, 0);
  apply_pauli_rotation(s, 1, Pauli::Y, 0.5 * kPi);  // |+>
  apply_1q(s, 1, demo_unitary(p));
  return s;
}

inline double demo_loss_simulated(const PolarPoint& p) {
  return pauli_expectation(demo_state(p), 1, Pauli::X);
}

/// Re{<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>} with central-difference
/// derivatives of the simulated state.
inline Eigen::Matrix2d fubini_study_numeric(const PolarPoint& p, double h = 1e-5) {
  const Eigen::VectorXcd psi = demo_state(p).to_eigen();
  auto deriv = [&](int k) {
    PolarPoint a = p, b = p;
    (k == 0 ? a.theta : a.phi) += h;
    (k == 0 ? b.theta : b.phi) -= h;
    return Eigen::VectorXcd((demo_state(a).to_eigen() - demo_state(b).to_eigen()) /
                            (2.0 * h));
  };
  const Eigen::VectorXcd d[2] = {deriv(0), deriv(1)};
  Eigen::Matrix2d f;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      f(i, j) = (d[i].dot(d[j]) - d[i].dot(psi) * psi.dot(d[j])).real();
    }
  }
  return f;
}

/// grad^T F^{-1} grad. Returns nullopt when the metric is singular.
inline std::optional<double> metric_quadratic_form(const Eigen::Vector2d& grad,
                                                   const Eigen::Matrix2d& metric) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(metric);
  if (es.eigenvalues().cwiseAbs().minCoeff() <= kPinvThreshold) return std::nullopt;
  return grad.dot(metric.ldlt().solve(grad));
}

/// Left side of the QGI inequality, (1/2) grad^T F^{-1} grad.
inline std::optional<double> qgi_lhs(const PolarPoint& p, const Eigen::Matrix2d& metric) {
  const auto q = metric_quadratic_form(demo_gradient(p), metric);
  if (!q) return std::nullopt;
  return 0.5 * *q;
}

/// Left side of the PL inequality, (1/2) ||grad||^2.
inline double pl_lhs(const PolarPoint& p) {
  return 0.5 * demo_gradient(p).squaredNorm();
}

/// Closed form of grad^T F^{-1} grad for F = s * diag(cos^2 phi, 1):
/// (sin^2 theta + cos^2 theta sin^2 phi) / s.
inline double demo_quadratic_form_closed(const PolarPoint& p, double scale) {
  const double st = std::sin(p.theta), ct = std::cos(p.theta), sp = std::sin(p.phi);
  return (st * st + ct * ct * sp * sp) / scale;
}

// ----------------------------------------------------------------------------
// Polar example: L(r, t) = 1/2 [(r cos t - 1)^2 + r^2 sin^2 t], F = diag(1, r^2).

inline double amari_loss(double r, double t) {
  const double a = r * std::cos(t) - 1.0, b = r * std::sin(t);
  return 0.5 * (a * a + b * b);
}

inline Eigen::Vector2d amari_gradient(double r, double t) {
  return {r - std::cos(t), r * std::sin(t)};
}

inline Eigen::Matrix2d amari_metric(double r) {
  Eigen::Matrix2d f;
  f << 1.0, 0.0, 0.0, r * r;
  return f;
}

inline std::optional<double> amari_quadratic_form(double r, double t) {
  return metric_quadratic_form(amari_gradient(r, t), amari_metric(r));
}

// ----------------------------------------------------------------------------
// GD vs QNGD trajectories

inline constexpr double kDemoMetricGuard = 1e-8;

/// Exact problem on the demo landscape. QNGD uses the analytic inverse
/// diag(4 / cos^2 phi, 4); past the |cos phi| guard only the phi component of
/// the step is kept. Iterates are clamped to the closure of the domain.
inline ExactProblem demo_problem() {
  ExactProblem p;
  p.loss = [](const ParamVector& t) { return demo_loss({t[0], t[1]}); };
  p.gradient = [](const ParamVector& t) {
    const Eigen::Vector2d g = demo_gradient({t[0], t[1]});
    return RealVector(g);
  };
  p.metric = [](const ParamVector& t) {
    return RealMatrix(fubini_study_demo_metric({t[0], t[1]}));
  };
  p.natural_direction = [](const ParamVector& t, const RealVector& g,
                           std::vector<std::string>& events) {
    const double c = std::cos(t[1]);
    RealVector d(2);
    if (std::abs(c) > kDemoMetricGuard) {
      d << 4.0 * g(0) / (c * c), 4.0 * g(1);
    } else {
      d << 0.0, 4.0 * g(1);
      events.push_back("singular metric at phi=" + std::to_string(t[1]) +
                       ", theta component dropped");
    }
    return std::optional<RealVector>(d);
  };
  p.project = [](ParamVector& t, std::vector<std::string>& events) {
    const double th = std::clamp(t[0], 0.0, kPi);
    const double ph = std::clamp(t[1], 0.5 * kPi, 1.5 * kPi);
    if (th != t[0] || ph != t[1]) {
      events.push_back("clamped (" + std::to_string(t[0]) + ", " +
                       std::to_string(t[1]) + ")");
      t[0] = th;
      t[1] = ph;
    }
  };
  return p;
}

struct DemoResult {
  PathTrace gd;
  PathTrace qngd;
};

inline DemoResult run_demo(const PolarPoint& initial, double eta, int steps) {
  if (!in_demo_domain(initial)) throw Error("run_demo: initial point outside domain");
  const ExactProblem p = demo_problem();
  const ParamVector t0 = {initial.theta, initial.phi};
  return {run_exact_gd(p, t0, eta, steps), run_exact_qngd(p, t0, eta, steps)};
}

/// Rows (iteration, method, theta, phi, loss).
inline void write_demo_csv(std::ostream& out, const DemoResult& r) {
  const auto old = out.precision(17);
  out << "# qnscd geometry demo v1\n";
  out << "iter,method,theta,phi,loss\n";
  auto rows = [&](const PathTrace& t, const char* name) {
    for (std::size_t i = 0; i < t.path.size(); ++i) {
      out << i << ',' << name << ',' << t.path[i][0] << ',' << t.path[i][1] << ','
          << t.loss[i] << '\n';
    }
  };
  rows(r.gd, "GD");
  rows(r.qngd, "QNGD");
  out.precision(old);
}

}  // namespace qnscd

#endif  // QNSCD_GEOMETRY_HPP_
