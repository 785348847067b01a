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
#include <vector>

#include "spikegrad/common.hpp"

namespace spikegrad {

/// Independent Bernoulli spikes with P(spike per step) = rate * dt, one
/// column per entry of `rates_hz`. Throws ConfigError for negative rates or
/// rate * dt > 1.
SpikeRaster gen_poisson_raster(const std::vector<double>& rates_hz, Eigen::Index steps, double dt,
                               std::uint64_t seed);

struct JitterSpec {
  double delete_prob = 0.1;
  // Surviving spikes move by a uniform offset in [-max_shift, max_shift].
  int max_shift = 1;

  static JitterSpec none() { return JitterSpec{0.0, 0}; }
};

/// Jittered copy of a binary raster. Spikes shifted outside the trial are
/// dropped and coinciding spikes merge.
SpikeRaster jitter_raster(const SpikeRaster& raster, const JitterSpec& jitter, Rng& rng);

struct LabeledRaster {
  SpikeRaster input;
  int label = 0;
};

struct PatternTaskSpec {
  int n_classes = 3;
  Eigen::Index n_inputs = 32;
  Eigen::Index steps = 100;
  double dt = 1e-3;
  double rate_hz = 50.0;
  int train_per_class = 10;
  int test_per_class = 5;
  JitterSpec jitter;
};

struct PatternDataset {
  std::vector<SpikeRaster> prototypes;  // one per class
  std::vector<LabeledRaster> train;
  std::vector<LabeledRaster> test;
};

/// Frozen-Poisson prototype per class, trials are jittered copies. Train and
/// test trials interleave classes (label = index mod n_classes).
PatternDataset gen_pattern_task(const PatternTaskSpec& spec, std::uint64_t seed);

// Number of positions at which two equally shaped rasters differ.
Eigen::Index hamming_distance(const SpikeRaster& a, const SpikeRaster& b);

/// Index of the prototype closest in van Rossum distance (first on ties).
int nearest_prototype(const SpikeRaster& raster, const std::vector<SpikeRaster>& prototypes,
                      double kernel_decay);

/// Spiking target for class `label`: that class's output neuron fires every
/// `period` steps starting at `period - 1`, the others stay silent.
SpikeRaster class_target_raster(int label, int n_classes, Eigen::Index steps,
                                Eigen::Index period);

// Output neuron with the most spikes, -1 when the maximum is zero or shared.
int spike_count_prediction(const SpikeRaster& output);

/// A single frozen input pattern and a sparse target raster for each output.
struct SpikeTargetTask {
  SpikeRaster input;
  SpikeRaster target;
};

SpikeTargetTask gen_spike_target_task(Eigen::Index n_inputs, Eigen::Index n_outputs,
                                      Eigen::Index steps, double dt, double input_rate_hz,
                                      int spikes_per_output, std::uint64_t seed);

}  // namespace spikegrad
