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

#include <cstddef>
#include <vector>

#include "spikegrad/backward.hpp"
#include "spikegrad/common.hpp"
#include "spikegrad/dynamics.hpp"
#include "spikegrad/loss.hpp"
#include "spikegrad/surrogates.hpp"

namespace spikegrad {

// ---------------------------------------------------------------------------
// Real-time recurrent learning

inline constexpr Eigen::Index kRtrlMaxNeurons = 64;
inline constexpr Eigen::Index kRtrlMaxRecurrentNeurons = 32;

/// Full forward sensitivities: for every layer, dI/dtheta, dU/dtheta and
/// dS/dtheta for every parameter theta in the network, plus the loss-side
/// sensitivity of the output layer. Storage is [neurons x parameters] per
/// layer and quantity, so it grows as O(N^3) for N neurons per layer.
class RtrlState {
 public:
  explicit RtrlState(const NetworkParams& params);

  std::vector<Matrix> d_i;
  std::vector<Matrix> d_u;
  std::vector<Matrix> d_s;
  // Van Rossum: sensitivity of the filtered output error.
  // Cross-entropy: dU/dtheta captured at each class's running maximum.
  Matrix d_loss;

  std::size_t bytes() const;
};

struct RtrlOptions {
  BackwardOptions backward;
  // Bypass the network-size guard.
  bool force = false;
};

struct RtrlResult {
  GradientSet grad;
  double loss = 0.0;
  std::size_t state_bytes = 0;
};

/// Simulates the network and propagates parameter sensitivities forward in
/// time, contracting them with the instantaneous loss derivative at every
/// step. Matches bptt on the same trajectory.
RtrlResult rtrl(const NetworkParams& params, const SpikeRaster& input, const LossSpec& loss,
                const RtrlOptions& options, const SpikeFunction& spike_fn = {});

// ---------------------------------------------------------------------------
// SuperSpike eligibility traces

/// Output-layer eligibility: per synapse (i,j) the current and membrane
/// sensitivities dI_i/dW_ij, dU_i/dW_ij with the reset term dropped, and the
/// kernel-filtered sigma'(U_i - threshold) dU_i/dW_ij; per neuron the
/// filtered error e = eps * (S - S*).
struct EligibilityState {
  Matrix d_i;
  Matrix d_u;
  Matrix filtered;
  Vector error;

  static EligibilityState zeros(Eigen::Index n_post, Eigen::Index n_pre);
  std::size_t bytes() const;
};

/// Advances the traces to step n and returns dL[n]/dW = e_i[n] * filtered_ij[n].
/// `layer_now` is the layer's state at n, `pre_spikes_prev` the presynaptic
/// spikes at n-1 (zeros at n = 0), `target_now` the target spikes at n.
Matrix superspike_step(EligibilityState& state, const LayerState& layer_now,
                       const Vector& pre_spikes_prev, const Vector& target_now,
                       const LayerParams& params, const SurrogateSpec& surrogate,
                       double kernel_decay);

/// Hidden-layer traces for a hidden -> output feed-forward pair. The hidden
/// neuron's own sensitivity is carried through the output neurons' current
/// and membrane filters and gated by each output's surrogate, with the fixed
/// feedback matrix standing in for the output weights. Per synapse this
/// needs one filtered trace per output neuron.
struct HiddenEligibilityState {
  Matrix d_i;
  Matrix d_u;
  Matrix d_s;
  Matrix out_current;   // hidden sensitivity through the output current filter
  Matrix out_membrane;  // ... and then the output membrane filter
  std::vector<Matrix> filtered;  // one per output neuron

  static HiddenEligibilityState zeros(Eigen::Index n_hidden, Eigen::Index n_in,
                                      Eigen::Index n_out);
  std::size_t bytes() const;
};

/// Advances the hidden traces to step n and returns the hidden-layer
/// increment sum_k e_k[n] B_ik filtered_k[n]_ij. `feedback` is [n_hidden x
/// n_out]; with feedback = W_out^T the accumulated increments equal the
/// reset-detached surrogate gradient.
Matrix superspike_hidden_update(HiddenEligibilityState& state, const LayerState& hidden_now,
                                const Vector& input_prev, const LayerState& output_now,
                                const LayerParams& hidden, const LayerParams& output,
                                const Matrix& feedback, const Vector& output_error,
                                const SurrogateSpec& surrogate, double kernel_decay);

struct SuperSpikeOptions {
  SurrogateSpec surrogate;
  double epsilon_tau = 10e-3;
  // When positive, weights are updated after every step (online); otherwise
  // increments are accumulated over the trial and returned.
  double online_learning_rate = 0.0;
};

struct SuperSpikeResult {
  GradientSet grad;  // accumulated increments (gradient sign convention)
  double loss = 0.0;
  std::size_t state_bytes = 0;
  Trajectory trajectory;
};

/// Runs one trial of a one- or two-layer feed-forward spiking network forward
/// in time. `feedback` ([n_hidden x n_out]) is required for two layers.
/// Online mode mutates `params`.
SuperSpikeResult superspike(NetworkParams& params, const Matrix* feedback,
                            const SpikeRaster& input, const SpikeRaster& target,
                            const SuperSpikeOptions& options);

}  // namespace spikegrad
