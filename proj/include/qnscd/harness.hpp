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

// Experiment configuration, seeded runs, side-by-side comparison and CSV
// output for the classification task.

#ifndef QNSCD_HARNESS_HPP_
#define QNSCD_HARNESS_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qnscd/dataset.hpp"
#include "qnscd/loss.hpp"
#include "qnscd/optimizer.hpp"
#include "qnscd/pqc.hpp"

namespace qnscd {

inline constexpr const char* kTraceSchema = "# qnscd trace v1";
inline constexpr const char* kTraceColumns =
    "step,iter,emp_loss,avg_exp_loss,opt_loss,samples,wall_ms";

// Validation data lives far away from the training batch indices.
inline constexpr std::uint64_t kValidationBatch = std::uint64_t{1} << 40;

struct ExperimentConfig {
  std::string circuit = "Q3L3";  // builtin name or circuit file
  OptimizerKind optimizer = OptimizerKind::kQnscd2;
  double eta = 2.5e-3;
  double beta = 0.7;
  int steps = 150;
  int batch_size = 600;
  std::uint64_t seed = 2;
  int validation_size = 1000;
  std::string output_dir = ".";
  double estimator_scale = 1.0;
  int record_every = 0;
  bool wall_clock = false;
};

inline std::string trim_copy(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Applies one key=value setting.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  auto num = [&](auto& field) {
    std::istringstream in(value);
    in >> field;
    if (in.fail() || !in.eof()) throw Error("config: bad value for " + key + ": " + value);
  };
  if (key == "circuit") {
    cfg.circuit = value;
  } else if (key == "optimizer") {
    cfg.optimizer = optimizer_from_name(value);
  } else if (key == "eta" || key == "learning_rate") {
    num(cfg.eta);
  } else if (key == "beta") {
    num(cfg.beta);
  } else if (key == "steps") {
    num(cfg.steps);
  } else if (key == "batch_size" || key == "N") {
    num(cfg.batch_size);
  } else if (key == "seed") {
    num(cfg.seed);
  } else if (key == "validation_size") {
    num(cfg.validation_size);
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "estimator_scale") {
    num(cfg.estimator_scale);
  } else if (key == "record_every") {
    num(cfg.record_every);
  } else if (key == "wall_clock") {
    cfg.wall_clock = value == "1" || value == "true";
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

/// Flat key=value text; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(lineno) + ": expected key=value");
    }
    set_config_value(cfg, trim_copy(line.substr(0, eq)), trim_copy(line.substr(eq + 1)));
  }
}

inline ExperimentConfig load_config_file(const std::string& path,
                                         ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(base, buf.str());
  return base;
}

/// Shortest text that parses back to the same double.
inline std::string shortest_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "circuit=" << cfg.circuit << '\n'
      << "optimizer=" << optimizer_name(cfg.optimizer) << '\n'
      << "eta=" << shortest_double(cfg.eta) << '\n'
      << "beta=" << shortest_double(cfg.beta) << '\n'
      << "steps=" << cfg.steps << '\n'
      << "batch_size=" << cfg.batch_size << '\n'
      << "seed=" << cfg.seed << '\n'
      << "validation_size=" << cfg.validation_size << '\n'
      << "estimator_scale=" << shortest_double(cfg.estimator_scale) << '\n'
      << "record_every=" << cfg.record_every << '\n';
  return out.str();
}

inline OptimizerConfig optimizer_config(const ExperimentConfig& cfg) {
  OptimizerConfig o;
  o.kind = cfg.optimizer;
  o.learning_rate = cfg.eta;
  o.beta = cfg.beta;
  o.steps = cfg.steps;
  o.batch_size = cfg.batch_size;
  o.seed = cfg.seed;
  o.estimator_scale = cfg.estimator_scale;
  o.record_every = cfg.record_every;
  o.wall_clock = cfg.wall_clock;
  return o;
}

inline void validate_experiment(const ExperimentConfig& cfg,
                                const LayeredCircuit& circuit) {
  if (!(cfg.eta > 0.0)) throw Error("eta must be positive");
  if (!(cfg.beta > 0.0)) throw Error("beta must be positive");
  if (cfg.steps < 0) throw Error("steps must be non-negative");
  if (cfg.validation_size <= 0) throw Error("validation_size must be positive");
  validate_config(optimizer_config(cfg), circuit);
}

struct ExperimentSummary {
  std::string optimizer;
  double final_avg_exp_loss = std::nan("");
  double final_emp_loss = std::nan("");
  double final_opt_loss = std::nan("");
  double validation_accuracy = 0.0;  // single-shot
  double validation_stderr = 0.0;    // binomial
  double validation_expected_accuracy = 0.0;
  double optimal_accuracy = 0.0;  // Holevo-Helstrom, validation set
  long samples = 0;
  long iterations = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  TrainingTrace trace;
  ExperimentSummary summary;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const LayeredCircuit circuit = resolve_circuit(cfg.circuit);
  validate_experiment(cfg, circuit);
  const int d = circuit.num_qubits();
  const DatasetStream stream(d, cfg.seed);
  const Povm povm = parity_povm(d);
  const LossFunction loss = LossFunction::zero_one();

  ExperimentResult r;
  r.config = cfg;
  r.trace = train(circuit, stream, povm, loss, optimizer_config(cfg));

  auto& s = r.summary;
  s.optimizer = optimizer_name(cfg.optimizer);
  s.samples = r.trace.samples_consumed;
  s.iterations = r.trace.iterations;
  if (!r.trace.rows.empty()) {
    s.final_avg_exp_loss = r.trace.rows.back().avg_exp_loss;
    s.final_emp_loss = r.trace.rows.back().emp_loss;
    s.final_opt_loss = r.trace.rows.back().opt_loss;
  }
  const Batch validation =
      stream.batch(kValidationBatch, static_cast<std::size_t>(cfg.validation_size));
  Rng rng(cfg.seed, kEvalStream + 1);
  const ParamVector& theta = r.trace.snapshots.back();
  const double n = static_cast<double>(validation.size());
  s.validation_accuracy = 1.0 - empirical_loss(circuit, theta, povm, validation, rng);
  s.validation_stderr =
      std::sqrt(s.validation_accuracy * (1.0 - s.validation_accuracy) / n);
  s.validation_expected_accuracy =
      1.0 - average_expected_loss(circuit, theta, povm, validation, loss);
  s.optimal_accuracy = 1.0 - optimal_expected_loss(validation);
  return r;
}

// ----------------------------------------------------------------------------
// CSV

inline void write_trace_csv(std::ostream& out, const ExperimentConfig& cfg,
                            const TrainingTrace& trace) {
  out << kTraceSchema << " circuit=" << cfg.circuit
      << " optimizer=" << optimizer_name(cfg.optimizer) << " seed=" << cfg.seed
      << '\n';
  out << kTraceColumns << '\n';
  const auto old = out.precision(17);
  for (const auto& row : trace.rows) {
    out << row.step << ',' << row.iter << ',' << row.emp_loss << ','
        << row.avg_exp_loss << ',' << row.opt_loss << ',' << row.samples << ','
        << row.wall_ms << '\n';
  }
  out.precision(old);
}

inline void write_theta_csv(std::ostream& out, const TrainingTrace& trace) {
  out << "# qnscd theta v1\n";
  const auto old = out.precision(17);
  for (std::size_t s = 0; s < trace.snapshots.size(); ++s) {
    out << s;
    for (double t : trace.snapshots[s]) out << ',' << t;
    out << '\n';
  }
  out.precision(old);
}

inline void print_summary(std::ostream& out, const ExperimentSummary& s) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  out << "optimizer            " << s.optimizer << '\n'
      << "final avg exp loss   " << s.final_avg_exp_loss << '\n'
      << "final opt loss       " << s.final_opt_loss << '\n'
      << "validation accuracy  " << s.validation_accuracy << " +- "
      << s.validation_stderr << '\n'
      << "expected accuracy    " << s.validation_expected_accuracy << '\n'
      << "optimal accuracy     " << s.optimal_accuracy << '\n'
      << "samples consumed     " << s.samples << " (" << s.iterations
      << " iterations x " << kSamplesPerIteration << ")\n";
  out.flags(flags);
}

/// Writes <stem>.csv and <stem>_theta.csv into cfg.output_dir.
inline std::filesystem::path write_experiment_files(const ExperimentResult& r,
                                                    const std::string& stem) {
  const std::filesystem::path dir(r.config.output_dir);
  std::filesystem::create_directories(dir);
  const auto trace_path = dir / (stem + ".csv");
  std::ofstream trace(trace_path);
  if (!trace) throw Error("cannot write " + trace_path.string());
  write_trace_csv(trace, r.config, r.trace);
  std::ofstream theta(dir / (stem + "_theta.csv"));
  if (!theta) throw Error("cannot write theta snapshot");
  write_theta_csv(theta, r.trace);
  return trace_path;
}

// ----------------------------------------------------------------------------
// Comparison

/// Runs configs side by side on worker threads. All configs must share the
/// circuit, the seed and the per-step sample budget.
inline std::vector<ExperimentResult> compare(const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw Error("compare: no configs");
  const auto& ref = configs.front();
  for (const auto& c : configs) {
    if (c.circuit != ref.circuit || c.seed != ref.seed) {
      throw Error("compare: configs must share circuit and seed");
    }
    if (c.batch_size != ref.batch_size || c.steps != ref.steps) {
      throw Error("compare: sample budgets differ (" +
                  std::to_string(long(c.steps) * c.batch_size) + " vs " +
                  std::to_string(long(ref.steps) * ref.batch_size) + ")");
    }
  }
  std::vector<ExperimentResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    workers.emplace_back([&, i] {
      try {
        results[i] = run_experiment(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& r : results) {
    if (r.summary.samples != results.front().summary.samples) {
      throw Error("compare: samples consumed differ across runs");
    }
  }
  return results;
}

inline void print_comparison(std::ostream& out, const std::vector<ExperimentResult>& rs) {
  const auto flags = out.flags();
  out << std::left << std::setw(12) << "optimizer" << std::right << std::setw(14)
      << "avg_exp_loss" << std::setw(12) << "opt_loss" << std::setw(20)
      << "val_acc" << std::setw(12) << "opt_acc" << std::setw(12) << "samples"
      << '\n';
  out << std::fixed;
  for (const auto& r : rs) {
    const auto& s = r.summary;
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(2) << 100.0 * s.validation_accuracy
        << " +- " << 100.0 * s.validation_stderr;
    out << std::left << std::setw(12) << s.optimizer << std::right
        << std::setprecision(4) << std::setw(14) << s.final_avg_exp_loss
        << std::setw(12) << s.final_opt_loss << std::setw(20) << acc.str()
        << std::setprecision(2) << std::setw(12) << 100.0 * s.optimal_accuracy
        << std::setw(12) << s.samples << '\n';
  }
  out << "samples per step: " << rs.front().config.batch_size << " for every row\n";
  out.flags(flags);
}

}  // namespace qnscd

#endif  // QNSCD_HARNESS_HPP_
