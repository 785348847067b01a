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
#include <cstdint>
#include <string_view>
#include <vector>

#include "spikegrad/backward.hpp"
#include "spikegrad/common.hpp"
#include "spikegrad/dynamics.hpp"
#include "spikegrad/loss.hpp"

namespace spikegrad {

/// Fixed random matrices used in place of transposed forward weights. They
/// are drawn once from U(-1, 1) / sqrt(fan-in) and never trained.
struct FeedbackMatrices {
  // Feedback alignment: g[l] ([n_{l-1} x n_l]) replaces W[l]^T for l >= 1.
  // Local errors: g[l] ([target_dim x n_l]) projects hidden layer l.
  std::vector<Matrix> g;
  // Direct feedback alignment: h[l] ([n_l x n_top]) for each hidden layer.
  std::vector<Matrix> h;
  std::uint64_t seed = 0;

  static FeedbackMatrices for_alignment(const NetworkParams& params, std::uint64_t seed);
  static FeedbackMatrices for_local_errors(const NetworkParams& params, Eigen::Index target_dim,
                                           std::uint64_t seed);

  bool operator==(const FeedbackMatrices& other) const;
};

Matrix random_feedback(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// BPTT with each cross-layer W^T replaced by feedback.g.
GradientSet fa_backward(const Trajectory& trajectory, const NetworkParams& params,
                        const FeedbackMatrices& feedback, const LossSpec& loss,
                        const BackwardOptions& options);

/// BPTT where every hidden layer receives the top layer's current error
/// through feedback.h instead of the layer above.
GradientSet dfa_backward(const Trajectory& trajectory, const NetworkParams& params,
                         const FeedbackMatrices& feedback, const LossSpec& loss,
                         const BackwardOptions& options);

enum class LocalLossKind { kSquared, kCrossEntropy };

LocalLossKind parse_local_loss_kind(std::string_view name);  // squared | xent

/// Everything a layer-local rule may look at: its own recorded state and the
/// spikes arriving at it.
struct LayerTrajectoryView {
  const Matrix& pre_spikes;  // steps x n_pre
  const LayerTrace& trace;
  const NeuronConfig& cfg;
};

struct LocalErrorOptions {
  SurrogateSpec surrogate;
  double kernel_decay = 0.9;  // rate filter decay per step
  LocalLossKind loss = LocalLossKind::kSquared;
};

/// Auxiliary per-layer state of the local rule. The presynaptic traces do not
/// depend on the postsynaptic neuron, so the state is linear in layer size.
struct LocalErrorState {
  Vector pre_current;   // alpha-filtered presynaptic spikes
  Vector pre_membrane;  // ... then beta-filtered
  Vector rate;          // kernel-filtered own spikes

  static LocalErrorState zeros(Eigen::Index n_post, Eigen::Index n_pre);
  std::size_t bytes() const;
};

struct LocalErrorResult {
  Matrix dw;
  double loss = 0.0;
  std::size_t state_bytes = 0;
};

/// Layer-wise loss on a fixed random projection of the layer's filtered
/// spike rate against a pseudo-target (steps x target_dim):
///   delta_i[n] = sigma'(U_i[n] - threshold) d/dy_i L(G y[n], target[n])
///   dW_ij     += delta_i[n] * presynaptic trace_j[n]
LocalErrorResult local_error_update(const LayerTrajectoryView& layer, const Matrix& g_local,
                                    const Matrix& pseudo_target,
                                    const LocalErrorOptions& options);

}  // namespace spikegrad
