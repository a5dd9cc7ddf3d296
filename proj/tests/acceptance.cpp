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

// Runs the eleven acceptance criteria at full budget. One line per
// criterion; exit status 1 if any fails.

#include <iostream>
#include <string>
#include <vector>

#include "qnscd/verify.hpp"

namespace {

struct Criterion {
  int id;
  std::vector<qnscd::Check> checks;
  double time_limit;  // seconds, 0 = none
};

}  // namespace

int main() {
  using namespace qnscd;
  const VerifyOptions opt;
  std::vector<Criterion> criteria;
  auto add = [&](int id, std::vector<Check> checks, double limit) {
    criteria.push_back({id, std::move(checks), limit});
    const auto& c = criteria.back();
    bool ok = true;
    double seconds = 0.0;
    for (const auto& ch : c.checks) {
      ok = ok && ch.passed;
      seconds += ch.seconds;
    }
    const bool in_time = c.time_limit <= 0.0 || seconds <= c.time_limit;
    std::cout << "criterion " << id << ": " << (ok && in_time ? "PASS" : "FAIL") << "\n";
    for (const auto& ch : c.checks) {
      std::cout << "  ";
      print_check(std::cout, ch);
    }
    if (!in_time) std::cout << "  over time limit " << c.time_limit << "s\n";
    std::cout.flush();
    return ok && in_time;
  };

  bool all = true;
  all &= add(1, {check_commutator_identity(opt)}, 10.0);
  all &= add(2, {check_sequential_anticommutator(opt)}, 60.0);
  all &= add(3, {check_metric_unbiased(opt)}, 300.0);
  all &= add(4, check_gradient_unbiased(opt), 300.0);
  all &= add(5, {check_min_beta()}, 1.0);
  all &= add(6, check_optimal_loss(opt), 0.0);
  all &= add(7, check_taylor_ratio(opt), 0.0);
  all &= add(8, {check_fidelity_sandwich(opt)}, 0.0);
  all &= add(9, {check_reference_training(opt)}, 1800.0);
  all &= add(10, {check_demo_trajectories(opt)}, 60.0);
  all &= add(11, {check_update_equivalence(opt)}, 0.0);
  std::cout << (all ? "all criteria passed" : "some criteria failed") << "\n";
  return all ? 0 : 1;
}
