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
#include <iosfwd>
#include <optional>
#include <vector>

#include "spikegrad/common.hpp"

namespace spikegrad {

struct Decays {
  double alpha;  // synaptic current decay per step
  double beta;   // membrane decay per step
};

/// exp(-dt/tau_syn), exp(-dt/tau_mem). Throws ConfigError on non-positive input.
Decays derive_decays(double dt, double tau_syn, double tau_mem);

/// Per-layer neuron constants. Resting potential is 0 and input resistance
/// is 1 throughout; a threshold of +inf marks a non-spiking leaky readout.
struct NeuronConfig {
  double dt = 1e-3;
  double tau_syn = 5e-3;
  double tau_mem = 10e-3;
  double alpha = 0.0;
  double beta = 0.0;
  double threshold = 1.0;

  static constexpr double kRestPotential = 0.0;

  static NeuronConfig from_time_constants(double dt, double tau_syn, double tau_mem,
                                          double threshold = 1.0);
  // For tests and hand-built examples that specify decays directly.
  static NeuronConfig from_decays(double alpha, double beta, double threshold = 1.0);
  NeuronConfig as_readout() const;

  bool spiking() const;
  void validate() const;
};

struct LayerParams {
  Matrix w;                 // [n_post x n_pre]
  std::optional<Matrix> v;  // [n_post x n_post] recurrent weights
  NeuronConfig cfg;

  Eigen::Index n_post() const { return w.rows(); }
  Eigen::Index n_pre() const { return w.cols(); }
  void validate() const;
};

struct NetworkParams {
  std::vector<LayerParams> layers;

  Eigen::Index n_inputs() const;
  Eigen::Index n_outputs() const;
  Eigen::Index total_neurons() const;
  Eigen::Index parameter_count() const;
  bool recurrent() const;
  void validate() const;
};

/// Forward spike nonlinearity. The default is the hard step with a spike at
/// exactly threshold. A positive steepness switches to a logistic gate,
/// turning the model into a smooth network whose true gradient can be
/// checked by finite differences.
struct SpikeFunction {
  double soft_steepness = 0.0;

  bool soft() const { return soft_steepness > 0.0; }
  double value(double u, double threshold) const;
  // Exact derivative of the soft gate; only meaningful when soft().
  double derivative(double u, double threshold) const;
};

struct LayerState {
  Vector i;
  Vector u;
  Vector s;

  static LayerState zeros(Eigen::Index n);
};

/// One step of the discrete LIF recurrence:
///   i' = alpha i + W pre + V s
///   u' = beta u + i - s (threshold - rest)
///   s' = step(u' - threshold)
LayerState step_layer(const LayerState& state, const Vector& pre_spikes,
                      const LayerParams& params, const SpikeFunction& spike_fn = {});

/// Recorded history of one layer; row n holds time step n.
struct LayerTrace {
  Matrix i;
  Matrix u;
  Matrix s;

  LayerState at(Eigen::Index step) const;
};

struct Trajectory {
  SpikeRaster input;
  std::vector<LayerTrace> layers;
  SpikeFunction spike_fn;
  double dt = 1e-3;  // output layer's step, used by loss kernels

  Eigen::Index steps() const { return input.rows(); }
  // Spikes feeding layer `layer`: the input raster for layer 0.
  const Matrix& presynaptic(std::size_t layer) const;
};

/// Simulates `horizon` steps from the zero state (or input.rows() when
/// horizon < 0). Layer l at step n+1 sees layer l-1's spikes from step n.
Trajectory run_network(const NetworkParams& params, const SpikeRaster& input,
                       Eigen::Index horizon = -1, const SpikeFunction& spike_fn = {});

/// CSV with header step,layer,neuron,I,U,S. Layers are numbered from 1.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace spikegrad
