// Copyright 2026 The spikegrad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spikegrad/checkpoint.hpp"
#include "spikegrad/config.hpp"
#include "spikegrad/dynamics.hpp"
#include "spikegrad/gradcheck.hpp"
#include "spikegrad/scaling.hpp"
#include "spikegrad/spiketime.hpp"
#include "spikegrad/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

using spikegrad::ExperimentConfig;

// Config file first, then --set pairs, then dedicated flags.
struct ConfigFlags {
  std::string path;
  std::vector<std::string> sets;
  std::optional<std::string> method;
  std::optional<std::string> surrogate;
  std::optional<double> surrogate_scale;
  std::optional<std::string> loss;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> feedback_seed;
  bool detach_reset = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "key = value config file");
    cmd->add_option("--set", sets, "override one key, as key=value (repeatable)");
    cmd->add_option("--method", method, "bptt|rtrl|superspike|fa|dfa|local|spiketime");
    cmd->add_option("--surrogate", surrogate, "linear|fastsig|exp|hard");
    cmd->add_option("--surrogate-scale", surrogate_scale, "surrogate sharpness");
    cmd->add_option("--loss", loss, "auto|vanrossum|xent");
    cmd->add_option("--seed", seed, "weight seed");
    cmd->add_option("--feedback-seed", feedback_seed, "seed of the fixed feedback matrices");
    cmd->add_flag("--detach-reset", detach_reset, "drop the reset term from gradients");
  }

  ExperimentConfig build() const {
    ExperimentConfig config = path.empty() ? ExperimentConfig{} : spikegrad::load_config_file(path);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw spikegrad::ConfigError("--set expects key=value");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (method) config.set("method", *method);
    if (surrogate) config.set("surrogate", *surrogate);
    if (surrogate_scale) config.surrogate_scale = *surrogate_scale;
    if (loss) config.set("loss", *loss);
    if (seed) config.seed = *seed;
    if (feedback_seed) config.feedback_seed = *feedback_seed;
    if (detach_reset) config.detach_reset = true;
    config.validate();
    return config;
  }
};

// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw spikegrad::ConfigError("cannot write '" + path + "'");
  fn(out);
}

int run_train(const ConfigFlags& flags, const std::string& metrics_path,
              const std::string& checkpoint_path, bool wall_time, bool online,
              std::optional<int> epochs, std::optional<double> lr) {
  ExperimentConfig config = flags.build();
  if (online) config.online = true;
  if (epochs) config.epochs = *epochs;
  if (lr) config.learning_rate = *lr;
  config.validate();

  spikegrad::TrainOptions options;
  options.record_wall_time = wall_time;
  const spikegrad::TrainResult result = spikegrad::train(config, options);
  with_output(metrics_path, [&](std::ostream& out) { write_metrics_csv(out, result.metrics); });
  if (!checkpoint_path.empty()) spikegrad::save_checkpoint_file(checkpoint_path, result.checkpoint);

  if (!result.metrics.empty()) {
    const auto& last = result.metrics.back();
    std::cerr << "epoch " << last.epoch << ": " << last.split << " loss "
              << spikegrad::format_double(last.loss) << ", accuracy "
              << spikegrad::format_double(last.accuracy) << '\n';
  }
  if (result.xor_result) {
    std::cerr << (result.xor_result->solved ? "solved at iteration " : "not solved after ")
              << (result.xor_result->solved ? result.xor_result->iterations_to_solve
                                            : config.epochs)
              << '\n';
  }
  if (result.diverged) {
    std::cerr << "diverged: " << result.divergence_message
              << " (checkpoint holds the last completed epoch)\n";
    return kExitDiverged;
  }
  return kExitOk;
}

int run_gradcheck(const ConfigFlags& flags, const std::string& out_path) {
  const ExperimentConfig config = flags.build();
  const spikegrad::GradcheckReport report = spikegrad::gradcheck(config);
  with_output(out_path, [&](std::ostream& out) { write_gradcheck_csv(out, report); });
  std::cerr << "max relative error " << spikegrad::format_double(report.max_rel_error())
            << (report.passed() ? " (pass)\n" : " (fail)\n");
  return report.passed() ? kExitOk : kExitCheckFailed;
}

int run_xor_demo(std::uint64_t seed, int iterations, double lr, int hidden,
                 const std::string& traces_path, const std::string& metrics_path) {
  spikegrad::XorTrainOptions options;
  options.seed = seed;
  options.max_iterations = iterations;
  options.learning_rate = lr;
  options.n_hidden = hidden;
  const spikegrad::XorTrainResult result = spikegrad::train_xor(options);
  if (!metrics_path.empty()) {
    std::vector<spikegrad::MetricsRow> rows;
    for (const auto& it : result.history) {
      rows.push_back({it.iteration, "train", it.loss, it.correct / 4.0, 0.0});
    }
    with_output(metrics_path, [&](std::ostream& out) { write_metrics_csv(out, rows); });
  }
  with_output(traces_path,
              [&](std::ostream& out) { spikegrad::write_xor_traces_csv(out, result.net); });
  if (result.solved) {
    std::cerr << "solved at iteration " << result.iterations_to_solve << '\n';
  } else {
    std::cerr << "not solved after " << iterations << " iterations\n";
  }
  return kExitOk;
}

int run_scaling(const std::vector<long>& sizes, long steps, const std::string& out_path) {
  std::vector<Eigen::Index> ns(sizes.begin(), sizes.end());
  const auto rows = spikegrad::scaling_report(ns, steps);
  with_output(out_path, [&](std::ostream& out) { spikegrad::write_scaling_csv(out, rows); });
  if (rows.size() >= 2) {
    std::vector<double> n, rtrl, elig, local;
    for (const auto& r : rows) {
      if (r.rtrl_bytes == 0) continue;
      n.push_back(static_cast<double>(r.n));
      rtrl.push_back(static_cast<double>(r.rtrl_bytes));
      elig.push_back(static_cast<double>(r.eligibility_bytes));
      local.push_back(static_cast<double>(r.local_bytes));
    }
    if (n.size() >= 2) {
      std::cerr << "log-log exponent: rtrl " << spikegrad::loglog_fit(n, rtrl).slope
                << ", eligibility " << spikegrad::loglog_fit(n, elig).slope << ", local "
                << spikegrad::loglog_fit(n, local).slope << '\n';
    }
  }
  return kExitOk;
}

int run_simulate(const ConfigFlags& flags, std::size_t sample, const std::string& out_path) {
  const ExperimentConfig config = flags.build();
  if (config.task == spikegrad::TaskKind::kXor) {
    throw spikegrad::ConfigError("simulate needs a raster task; use xor-demo for xor");
  }
  spikegrad::Rng rng(config.seed);
  const spikegrad::NetworkParams params = spikegrad::build_network(config, rng);
  const spikegrad::Dataset data = spikegrad::build_dataset(config);
  if (sample >= data.train.size()) throw spikegrad::ConfigError("sample index out of range");
  const spikegrad::Trajectory traj =
      spikegrad::run_network(params, data.train[sample].input, -1, config.spike_function());
  with_output(out_path, [&](std::ostream& out) { spikegrad::write_trajectory_csv(out, traj); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-based training of discrete-time spiking networks"};
  app.require_subcommand(1);

  ConfigFlags train_flags;
  std::string metrics_path;
  std::string checkpoint_path;
  bool wall_time = false;
  bool online = false;
  std::optional<int> epochs;
  std::optional<double> lr;
  auto* train = app.add_subcommand("train", "train a network and write per-epoch metrics CSV");
  train_flags.attach(train);
  train->add_option("--metrics", metrics_path, "metrics CSV path (default stdout)");
  train->add_option("--checkpoint", checkpoint_path, "checkpoint output path");
  train->add_flag("--wall-time", wall_time, "fill the wall_ms column");
  train->add_flag("--online", online, "superspike: update weights every step");
  train->add_option("--epochs", epochs, "number of epochs (xor: iterations)");
  train->add_option("--lr", lr, "learning rate");

  ConfigFlags check_flags;
  std::string check_out;
  auto* check = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  check_flags.attach(check);
  check->add_option("--out", check_out, "report CSV path (default stdout)");

  std::uint64_t xor_seed = 1;
  int xor_iterations = 2000;
  double xor_lr = 0.1;
  int xor_hidden = 4;
  std::string traces_path;
  std::string xor_metrics;
  auto* xor_demo = app.add_subcommand("xor-demo", "train the spike-time XOR network");
  xor_demo->add_option("--seed", xor_seed, "weight seed");
  xor_demo->add_option("--iterations", xor_iterations, "iteration budget")->check(CLI::NonNegativeNumber);
  xor_demo->add_option("--lr", xor_lr, "learning rate");
  xor_demo->add_option("--hidden", xor_hidden, "hidden neurons")->check(CLI::PositiveNumber);
  xor_demo->add_option("--traces", traces_path, "membrane trace CSV path (default stdout)");
  xor_demo->add_option("--metrics", xor_metrics, "per-iteration metrics CSV path");

  std::vector<long> sizes{8, 16, 32, 64};
  long scaling_steps = 10;
  std::string scaling_out;
  auto* scaling = app.add_subcommand("scaling-report", "learning-state memory versus layer size");
  scaling->add_option("--sizes", sizes, "layer sizes N")->delimiter(',');
  scaling->add_option("--steps", scaling_steps, "trial length of each measurement run");
  scaling->add_option("--out", scaling_out, "CSV path (default stdout)");

  ConfigFlags sim_flags;
  std::size_t sim_sample = 0;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "write the I/U/S trajectory of one sample");
  sim_flags.attach(simulate);
  simulate->add_option("--sample", sim_sample, "training sample index");
  simulate->add_option("--out", sim_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train) {
      return run_train(train_flags, metrics_path, checkpoint_path, wall_time, online, epochs, lr);
    }
    if (*check) return run_gradcheck(check_flags, check_out);
    if (*xor_demo) {
      return run_xor_demo(xor_seed, xor_iterations, xor_lr, xor_hidden, traces_path, xor_metrics);
    }
    if (*scaling) return run_scaling(sizes, scaling_steps, scaling_out);
    if (*simulate) return run_simulate(sim_flags, sim_sample, sim_out);
  } catch (const spikegrad::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::logic_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
