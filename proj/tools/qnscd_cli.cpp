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

// qnscd: train, compare, verify, dataset export, min-beta.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnscd/qnscd.hpp"

namespace {

// Command-line overrides; unset options leave the config file value alone.
struct Overrides {
  std::string config_file;
  std::optional<std::string> circuit, optimizer, output_dir;
  std::optional<double> eta, beta, estimator_scale;
  std::optional<int> steps, batch_size, validation_size, record_every;
  std::optional<std::uint64_t> seed;
  bool wall_clock = false;
};

void add_config_options(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_file, "key=value config file")
      ->check(CLI::ExistingFile);
  app->add_option("--circuit", o.circuit, "builtin name or circuit file");
  app->add_option("--optimizer", o.optimizer, "2-QNSCD, 2-RQSGD or 6-RQSGD");
  app->add_option("--eta", o.eta, "learning rate");
  app->add_option("--beta", o.beta, "metric regularisation");
  app->add_option("--steps", o.steps);
  app->add_option("--batch-size,-N", o.batch_size);
  app->add_option("--seed", o.seed);
  app->add_option("--validation-size", o.validation_size);
  app->add_option("--output-dir,-o", o.output_dir);
  app->add_option("--estimator-scale", o.estimator_scale);
  app->add_option("--record-every", o.record_every,
                  "iterations between trace rows, 0 = one per step");
  app->add_flag("--wall-clock", o.wall_clock, "fill the wall_ms column");
}

qnscd::ExperimentConfig build_config(const Overrides& o) {
  qnscd::ExperimentConfig cfg;
  if (const char* env = std::getenv("QNSCD_OUTPUT_DIR"); env && *env) {
    cfg.output_dir = env;
  }
  if (!o.config_file.empty()) cfg = qnscd::load_config_file(o.config_file, cfg);
  if (o.circuit) cfg.circuit = *o.circuit;
  if (o.optimizer) cfg.optimizer = qnscd::optimizer_from_name(*o.optimizer);
  if (o.eta) cfg.eta = *o.eta;
  if (o.beta) cfg.beta = *o.beta;
  if (o.steps) cfg.steps = *o.steps;
  if (o.batch_size) cfg.batch_size = *o.batch_size;
  if (o.seed) cfg.seed = *o.seed;
  if (o.validation_size) cfg.validation_size = *o.validation_size;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.estimator_scale) cfg.estimator_scale = *o.estimator_scale;
  if (o.record_every) cfg.record_every = *o.record_every;
  if (o.wall_clock) cfg.wall_clock = true;
  return cfg;
}

std::string stem_for(const qnscd::ExperimentConfig& cfg) {
  std::string name = qnscd::optimizer_name(cfg.optimizer);
  std::string circuit = std::filesystem::path(cfg.circuit).stem().string();
  return circuit + "_" + name + "_seed" + std::to_string(cfg.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-coordinate quantum natural stochastic coordinate descent"};
  app.require_subcommand(1);

  Overrides train_opts;
  auto* train = app.add_subcommand("train", "run one experiment");
  add_config_options(train, train_opts);

  Overrides compare_opts;
  std::vector<std::string> compare_list = {"2-QNSCD", "2-RQSGD", "6-RQSGD"};
  auto* cmp = app.add_subcommand("compare", "run optimizers side by side");
  add_config_options(cmp, compare_opts);
  cmp->add_option("--optimizers", compare_list, "optimizers to compare");

  std::vector<std::string> suites;
  double budget = 1.0;
  std::uint64_t verify_seed = qnscd::VerifyOptions{}.seed;
  auto* verify = app.add_subcommand("verify", "run property suites");
  verify->add_option("--suite", suites, "identities, unbiasedness, thresholds, geometry, training")
      ->check(CLI::IsMember(qnscd::verify_suite_names()));
  verify->add_option("--budget", budget, "scale factor for Monte Carlo sizes")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_seed);

  auto* dataset = app.add_subcommand("dataset", "dataset tools");
  dataset->require_subcommand(1);
  int ds_qubits = 3, ds_size = 600, ds_batches = 1;
  std::uint64_t ds_seed = 2, ds_first = 0;
  std::string ds_out;
  auto* ds_export = dataset->add_subcommand("export", "write generated samples as CSV");
  ds_export->add_option("--qubits,-d", ds_qubits)->check(CLI::Range(2, 10));
  ds_export->add_option("--size,-N", ds_size, "samples per batch")->check(CLI::PositiveNumber);
  ds_export->add_option("--batches", ds_batches)->check(CLI::PositiveNumber);
  ds_export->add_option("--first-batch", ds_first);
  ds_export->add_option("--seed", ds_seed);
  ds_export->add_option("--out,-o", ds_out, "file (default stdout)");

  int mb_c = 0;
  auto* mb = app.add_subcommand("min-beta", "smallest beta with positive-definite blocks");
  mb->add_option("c", mb_c, "number of parameters")->required()->check(CLI::Range(3, 1 << 20));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const auto cfg = build_config(train_opts);
      std::cerr << qnscd::format_config(cfg);
      const auto r = qnscd::run_experiment(cfg);
      const auto path = qnscd::write_experiment_files(r, stem_for(cfg));
      qnscd::print_summary(std::cout, r.summary);
      std::cout << "trace: " << path.string() << '\n';
      return 0;
    }
    if (*cmp) {
      const auto base = build_config(compare_opts);
      std::vector<qnscd::ExperimentConfig> configs;
      for (const auto& name : compare_list) {
        auto c = base;
        c.optimizer = qnscd::optimizer_from_name(name);
        configs.push_back(c);
      }
      const auto results = qnscd::compare(configs);
      for (const auto& r : results) qnscd::write_experiment_files(r, stem_for(r.config));
      qnscd::print_comparison(std::cout, results);
      return 0;
    }
    if (*verify) {
      if (suites.empty()) suites = qnscd::verify_suite_names();
      qnscd::VerifyOptions opt;
      opt.budget = budget;
      opt.seed = verify_seed;
      bool ok = true;
      for (const auto& s : suites) {
        std::cout << "== " << s << '\n';
        for (const auto& c : qnscd::run_verify_suite(s, opt)) {
          qnscd::print_check(std::cout, c);
          ok = ok && c.passed;
        }
      }
      return ok ? 0 : 1;
    }
    if (*ds_export) {
      std::ofstream file;
      if (!ds_out.empty()) {
        file.open(ds_out);
        if (!file) throw qnscd::Error("cannot write " + ds_out);
      }
      std::ostream& out = ds_out.empty() ? std::cout : file;
      const qnscd::DatasetStream stream(ds_qubits, ds_seed);
      qnscd::write_dataset_csv_header(out, ds_qubits);
      for (int b = 0; b < ds_batches; ++b) {
        const std::uint64_t idx = ds_first + static_cast<std::uint64_t>(b);
        qnscd::write_dataset_csv_rows(out, idx, stream.batch(idx, ds_size));
      }
      return 0;
    }
    if (*mb) {
      std::cout << std::setprecision(6) << qnscd::min_beta(mb_c) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
