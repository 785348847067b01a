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
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "spikegrad/common.hpp"

namespace spikegrad {

// Event-driven non-leaky integrate-and-fire neurons driven by exponentially
// decaying synaptic currents with unit time constant:
//   dU/dt = sum_j W_j H(t - t_j) exp(-(t - t_j))
// so that U(t) = sum_{t_j <= t} W_j (1 - exp(-(t - t_j))). Every neuron
// fires at most once. Times are in units of the synaptic time constant.

inline constexpr double kNoSpike = std::numeric_limits<double>::infinity();

struct FireResult {
  std::optional<double> time;        // empty when the neuron stays quiescent
  std::vector<std::size_t> causal;   // inputs that arrived before the spike
};

/// Earliest threshold crossing. Inputs with non-finite times never arrive.
/// With x = exp(t), a causal set C crosses at
///   x_out = sum_C W_j x_j / (sum_C W_j - threshold)
/// and the first set whose solution falls after its last member and before
/// the next arrival wins.
FireResult fire_time(std::span<const double> weights, std::span<const double> input_times,
                     double threshold);

struct FireGradient {
  Vector d_weights;  // dt_out/dW_j, zero outside the causal set
  Vector d_times;    // dt_out/dt_j, zero outside the causal set
};

/// Analytic derivatives of the closed form. Throws ContractError when the
/// neuron does not fire.
FireGradient fire_time_gradient(std::span<const double> weights,
                                std::span<const double> input_times, double threshold);

/// U(t) ignoring any output spike.
double membrane_potential(std::span<const double> weights, std::span<const double> input_times,
                          double t);

/// Two-layer event network: inputs -> hidden -> outputs, first-to-spike readout.
struct EventNet {
  Matrix w_hidden;  // [n_hidden x n_in]
  Matrix w_out;     // [n_out x n_hidden]
  double threshold = 1.0;

  static EventNet random(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out, Rng& rng);
};

struct EventForward {
  Vector hidden_times;  // kNoSpike when quiescent
  Vector output_times;
};

EventForward simulate(const EventNet& net, const Vector& input_times);

struct XorTrial {
  Vector input_times;
  int label;
};

inline constexpr double kEarlySpike = 0.0;
inline constexpr double kLateSpike = 1.0;

/// Four trials; same timing -> class 0, different timing -> class 1.
std::vector<XorTrial> xor_task();

struct FirstSpikeLoss {
  double loss;
  Vector d_times;
};

/// Softmax cross-entropy over negated output firing times.
FirstSpikeLoss first_to_spike_loss(const Vector& output_times, int label);

/// Index of the unique earliest output spike, or -1 for a tie or silence.
int first_to_spike_prediction(const Vector& output_times);

/// Handling of quiescent neurons during training.
struct QuiescencePolicy {
  // Output neurons that never fire are assigned this time after the trial's
  // last input spike.
  double virtual_delay = 10.0;
  // Linear penalty pushing a silent neuron's summed (arrived) input weight
  // above threshold + margin.
  double penalty = 1.0;
  double margin = 0.1;
};

struct EventGradient {
  Matrix d_hidden;
  Matrix d_out;
  double loss = 0.0;
  bool correct = false;
};

EventGradient event_loss_gradient(const EventNet& net, const XorTrial& trial,
                                  const QuiescencePolicy& policy = {});

/// Mean loss over trials (used for finite-difference checks).
double event_loss(const EventNet& net, const std::vector<XorTrial>& trials,
                  const QuiescencePolicy& policy = {});

struct XorTrainOptions {
  double learning_rate = 0.1;
  int max_iterations = 2000;
  std::uint64_t seed = 1;
  Eigen::Index n_hidden = 4;
  QuiescencePolicy quiescence;
};

struct XorIteration {
  int iteration;
  double loss;
  int correct;  // out of 4
};

struct XorTrainResult {
  EventNet net;
  std::vector<XorIteration> history;
  bool solved = false;
  int iterations_to_solve = -1;
};

/// Full-batch gradient descent on the four XOR trials. Stops at the first
/// iteration with 4/4 correct or after max_iterations.
XorTrainResult train_xor(const XorTrainOptions& options);

/// Membrane traces of every hidden and output neuron for the four trials,
/// sampled every `sample_dt` up to `t_end`. Columns:
/// trial,label,layer,neuron,t,U,fired
void write_xor_traces_csv(std::ostream& out, const EventNet& net, double sample_dt = 0.01,
                          double t_end = 6.0);

}  // namespace spikegrad
