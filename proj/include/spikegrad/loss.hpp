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

#include <string_view>
#include <utility>
#include <vector>

#include "spikegrad/common.hpp"
#include "spikegrad/dynamics.hpp"

namespace spikegrad {

enum class LossKind {
  kVanRossum,               // spiking output layer vs. target raster
  kMaxVoltageCrossEntropy,  // non-spiking readout, softmax over max-over-time U
};

LossKind parse_loss_kind(std::string_view name);  // vanrossum | xent
std::string_view loss_name(LossKind kind);

struct LossSpec {
  LossKind kind = LossKind::kVanRossum;
  double epsilon_tau = 10e-3;  // seconds
  SpikeRaster target;          // van Rossum only
  int label = 0;               // cross-entropy only

  static LossSpec van_rossum(SpikeRaster target, double epsilon_tau);
  static LossSpec cross_entropy(int label);
};

/// Per-step decay of the causal exponential kernel, exp(-dt/tau).
double kernel_decay(double dt, double tau);

/// Causal first-order filter along time (rows): y[n] = decay y[n-1] + x[n].
Matrix exponential_filter(const Matrix& x, double decay);

/// 1/2 sum_n sum_k (eps * (S - S*))^2 with the discrete causal kernel.
double van_rossum_loss(const SpikeRaster& output, const SpikeRaster& target, double decay);

struct SoftmaxResult {
  double loss;
  Vector grad;  // dL/dlogits
};

SoftmaxResult softmax_cross_entropy(const Vector& logits, int label);

struct ReadoutResult {
  double loss;
  Vector max_voltage;                    // per class
  std::vector<Eigen::Index> argmax_step;  // first step achieving the max
  Matrix d_u;                            // dL/dU[n][c], steps x classes
};

/// Softmax cross-entropy over each readout neuron's maximum membrane voltage
/// across the trial. The final layer must be a non-spiking readout.
ReadoutResult readout_loss(const Trajectory& trajectory, int label);

// Class with the largest max-over-time readout voltage.
int readout_prediction(const Trajectory& trajectory);

/// Loss value and its partial derivatives with respect to the final layer's
/// recorded spikes and membrane potentials (steps x n_out each).
struct OutputGradient {
  double loss = 0.0;
  Matrix d_s;
  Matrix d_u;
};

OutputGradient output_gradient(const Trajectory& trajectory, const LossSpec& loss);

double loss_value(const Trajectory& trajectory, const LossSpec& loss);

}  // namespace spikegrad
