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

#include <optional>
#include <vector>

#include "spikegrad/common.hpp"
#include "spikegrad/dynamics.hpp"
#include "spikegrad/loss.hpp"
#include "spikegrad/surrogates.hpp"

namespace spikegrad {

/// Per-layer weight gradients, shaped like NetworkParams.
struct GradientSet {
  std::vector<Matrix> dw;
  std::vector<std::optional<Matrix>> dv;

  static GradientSet zeros_like(const NetworkParams& params);

  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double factor);

  double squared_norm() const;
  bool all_finite() const;
  bool same_shape(const NetworkParams& params) const;

  // Layer by layer, W then V, each row-major. RTRL uses the same order.
  Vector flatten() const;
  Vector flatten_layer(std::size_t layer) const;
};

/// ||a - b|| / max(||a||, ||b||) over all entries; 0 when both are zero.
double relative_difference(const GradientSet& a, const GradientSet& b);
double relative_difference(const Vector& a, const Vector& b);

struct BackwardOptions {
  SurrogateSpec surrogate;
  // Treat the membrane reset as a constant in the gradient.
  bool detach_reset = false;
};

/// dS/dU used by every gradient backend: the soft gate's true derivative in
/// soft-forward mode, otherwise the surrogate.
double spike_gradient(const SpikeFunction& spike_fn, const SurrogateSpec& surrogate, double u,
                      double threshold);

/// How the error at layer l+1 reaches layer l in the reverse pass.
struct SpatialTransport {
  enum class Kind {
    kExact,     // W^T of the layer above
    kFeedback,  // fixed matrix per layer, shaped like W^T (feedback alignment)
    kDirect,    // fixed matrix per hidden layer from the top layer (direct FA)
    kNone,      // no error crosses layers
  };
  Kind kind = Kind::kExact;
  // kFeedback: matrices[l] replaces W[l]^T for l >= 1 (matrices[0] unused).
  // kDirect:   matrices[l] is [n_l x n_top] for every hidden layer l.
  const std::vector<Matrix>* matrices = nullptr;
};

/// Reverse-mode accumulation over the unrolled recurrence given the loss
/// partials at the output layer. Temporal paths (current decay, membrane
/// decay, reset, recurrent weights) are always exact; only the cross-layer
/// path is governed by `transport`.
GradientSet reverse_pass(const Trajectory& trajectory, const NetworkParams& params,
                         const OutputGradient& output, const BackwardOptions& options,
                         const SpatialTransport& transport = {});

/// Backpropagation through time with surrogate derivatives.
GradientSet bptt(const Trajectory& trajectory, const NetworkParams& params, const LossSpec& loss,
                 const BackwardOptions& options);

// Throws ContractError when the output layer does not suit the loss kind.
void check_loss_layer(const NetworkParams& params, const LossSpec& loss);

}  // namespace spikegrad
