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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "spikegrad/credit.hpp"
#include "spikegrad/dynamics.hpp"
#include "spikegrad/loss.hpp"
#include "spikegrad/surrogates.hpp"
#include "spikegrad/tasks.hpp"

namespace spikegrad {

enum class TaskKind { kXor, kPattern, kSpikeTarget };
enum class Method { kBptt, kRtrl, kSuperSpike, kFa, kDfa, kLocal, kSpikeTime };

TaskKind parse_task_kind(std::string_view name);  // xor | pattern | superspike-target
std::string_view task_name(TaskKind kind);
Method parse_method(std::string_view name);  // bptt | rtrl | superspike | fa | dfa | local | spiketime
std::string_view method_name(Method method);

/// Everything that determines a run. Text form is one `key = value` per line;
/// `#` starts a comment. Keys:
///
///   task             xor | pattern | superspike-target
///   method           bptt | rtrl | superspike | fa | dfa | local | spiketime
///   loss             auto | vanrossum | xent
///   surrogate        linear | fastsig | exp | hard
///   surrogate_scale  positive, or 0 for the surrogate's default
///   detach_reset     true | false
///   online           superspike only: update weights after every step
///   inputs, classes  input width and number of classes (outputs)
///   hidden           comma-separated hidden layer sizes, may be empty
///   recurrent        give hidden layers recurrent weights
///   dt, tau_syn, tau_mem, threshold
///   steps            trial length T
///   epsilon_tau      van Rossum kernel time constant (seconds)
///   target_period    steps between target spikes for van Rossum classes
///   target_spikes    spikes per output in the superspike-target task
///   soft_steepness   > 0 switches to the logistic forward pass
///   weight_scale     initial W ~ N(0, weight_scale^2 / fan_in)
///   recurrent_scale  the same for V
///   input_rate       Poisson rate of input neurons (Hz)
///   train_per_class, test_per_class, jitter_delete, jitter_shift
///   batch_size, learning_rate, epochs, clip_norm (0 disables clipping)
///   local_loss       squared | xent
///   local_decay      rate filter decay of the local rule
///   xor_hidden       hidden neurons of the spike-time XOR network
///   rtrl_force       bypass the RTRL size guard
///   seed             weight seed; data_seed and feedback_seed default to
///                    seed + 1 and seed + 2 when left at 0
struct ExperimentConfig {
  TaskKind task = TaskKind::kPattern;
  Method method = Method::kBptt;
  std::string loss = "auto";
  SurrogateKind surrogate = SurrogateKind::kFastSigmoid;
  double surrogate_scale = 0.0;
  bool detach_reset = false;
  bool online = false;

  Eigen::Index inputs = 32;
  int classes = 3;
  std::vector<Eigen::Index> hidden{64};
  bool recurrent = false;

  double dt = 1e-3;
  double tau_syn = 5e-3;
  double tau_mem = 10e-3;
  double threshold = 1.0;
  Eigen::Index steps = 100;
  double epsilon_tau = 10e-3;
  Eigen::Index target_period = 10;
  int target_spikes = 4;
  double soft_steepness = 0.0;

  double weight_scale = 0.5;
  double recurrent_scale = 0.5;
  double input_rate = 50.0;
  int train_per_class = 10;
  int test_per_class = 5;
  double jitter_delete = 0.1;
  int jitter_shift = 1;

  int batch_size = 10;
  double learning_rate = 3e-4;
  int epochs = 20;
  double clip_norm = 0.0;

  std::string local_loss = "squared";
  double local_decay = 0.9;
  int xor_hidden = 4;
  bool rtrl_force = false;

  std::uint64_t seed = 1;
  std::uint64_t data_seed = 0;
  std::uint64_t feedback_seed = 0;

  /// Assigns one key from its text value. Throws ConfigError for unknown
  /// keys or malformed values.
  void set(std::string_view key, std::string_view value);
  /// Applies every `key = value` line of a config file.
  void merge(std::istream& in);
  void validate() const;

  // All keys in a fixed order with shortest round-trip numbers.
  std::string canonical_text() const;
  std::uint64_t hash() const;

  std::uint64_t effective_data_seed() const { return data_seed != 0 ? data_seed : seed + 1; }
  std::uint64_t effective_feedback_seed() const {
    return feedback_seed != 0 ? feedback_seed : seed + 2;
  }
  SurrogateSpec surrogate_spec() const;
  LossKind loss_kind() const;
  LocalLossKind local_loss_kind() const { return parse_local_loss_kind(local_loss); }
  NeuronConfig neuron_config() const;
  PatternTaskSpec pattern_spec() const;
  SpikeFunction spike_function() const { return SpikeFunction{soft_steepness}; }
};

ExperimentConfig load_config_file(const std::string& path);

/// Random network for the config: hidden layers spike, the output layer is a
/// readout for cross-entropy and spiking for van Rossum.
NetworkParams build_network(const ExperimentConfig& config, Rng& rng);

}  // namespace spikegrad
