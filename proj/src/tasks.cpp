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

#include "spikegrad/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikegrad/loss.hpp"

namespace spikegrad {

SpikeRaster gen_poisson_raster(const std::vector<double>& rates_hz, Eigen::Index steps, double dt,
                               std::uint64_t seed) {
  if (!(dt > 0.0)) throw ConfigError("poisson raster: dt must be positive");
  if (steps < 0) throw ConfigError("poisson raster: negative length");
  for (double r : rates_hz) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ConfigError("poisson raster: rates must be finite and non-negative");
    }
    if (r * dt > 1.0) {
      throw ConfigError("poisson raster: rate " + format_double(r) + " Hz exceeds 1/dt");
    }
  }
  Rng rng(seed);
  const auto cols = static_cast<Eigen::Index>(rates_hz.size());
  SpikeRaster raster = SpikeRaster::Zero(steps, cols);
  for (Eigen::Index n = 0; n < steps; ++n) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (rng.bernoulli(rates_hz[static_cast<std::size_t>(c)] * dt)) raster(n, c) = 1.0;
    }
  }
  return raster;
}

SpikeRaster jitter_raster(const SpikeRaster& raster, const JitterSpec& jitter, Rng& rng) {
  if (jitter.delete_prob < 0.0 || jitter.delete_prob > 1.0 || jitter.max_shift < 0) {
    throw ConfigError("jitter: delete probability must lie in [0,1] and shift be >= 0");
  }
  SpikeRaster out = SpikeRaster::Zero(raster.rows(), raster.cols());
  const auto span = static_cast<std::uint64_t>(2 * jitter.max_shift + 1);
  for (Eigen::Index c = 0; c < raster.cols(); ++c) {
    for (Eigen::Index n = 0; n < raster.rows(); ++n) {
      if (raster(n, c) == 0.0) continue;
      if (rng.bernoulli(jitter.delete_prob)) continue;
      const Eigen::Index shift = static_cast<Eigen::Index>(rng.below(span)) - jitter.max_shift;
      const Eigen::Index to = n + shift;
      if (to >= 0 && to < raster.rows()) out(to, c) = 1.0;
    }
  }
  return out;
}

Eigen::Index hamming_distance(const SpikeRaster& a, const SpikeRaster& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("hamming: shape mismatch");
  return (a.array() != b.array()).count();
}

PatternDataset gen_pattern_task(const PatternTaskSpec& spec, std::uint64_t seed) {
  if (spec.n_classes < 2) throw ConfigError("pattern task needs at least two classes");
  if (spec.n_inputs < 1 || spec.steps < 1) throw ConfigError("pattern task: empty raster");
  if (spec.train_per_class < 0 || spec.test_per_class < 0) {
    throw ConfigError("pattern task: negative trial count");
  }
  Rng rng(seed);
  PatternDataset data;
  const std::vector<double> rates(static_cast<std::size_t>(spec.n_inputs), spec.rate_hz);
  while (static_cast<int>(data.prototypes.size()) < spec.n_classes) {
    SpikeRaster candidate = gen_poisson_raster(rates, spec.steps, spec.dt, rng.next_u64());
    const bool distinct = std::all_of(data.prototypes.begin(), data.prototypes.end(),
                                      [&](const SpikeRaster& p) {
                                        return hamming_distance(p, candidate) > 0;
                                      });
    if (distinct) data.prototypes.push_back(std::move(candidate));
  }
  auto fill = [&](std::vector<LabeledRaster>& set, int per_class) {
    for (int k = 0; k < per_class * spec.n_classes; ++k) {
      const int label = k % spec.n_classes;
      set.push_back(LabeledRaster{
          jitter_raster(data.prototypes[static_cast<std::size_t>(label)], spec.jitter, rng),
          label});
    }
  };
  fill(data.train, spec.train_per_class);
  fill(data.test, spec.test_per_class);
  return data;
}

int nearest_prototype(const SpikeRaster& raster, const std::vector<SpikeRaster>& prototypes,
                      double kernel_decay) {
  int best = -1;
  double best_distance = 0.0;
  for (std::size_t k = 0; k < prototypes.size(); ++k) {
    const double d = van_rossum_loss(raster, prototypes[k], kernel_decay);
    if (best < 0 || d < best_distance) {
      best = static_cast<int>(k);
      best_distance = d;
    }
  }
  return best;
}

SpikeRaster class_target_raster(int label, int n_classes, Eigen::Index steps,
                                Eigen::Index period) {
  if (label < 0 || label >= n_classes) throw ContractError("target label out of range");
  if (period < 1) throw ConfigError("target period must be positive");
  SpikeRaster target = SpikeRaster::Zero(steps, n_classes);
  for (Eigen::Index n = period - 1; n < steps; n += period) target(n, label) = 1.0;
  return target;
}

int spike_count_prediction(const SpikeRaster& output) {
  const Vector counts = output.colwise().sum().transpose();
  Eigen::Index best = 0;
  const double top = counts.maxCoeff(&best);
  if (top <= 0.0) return -1;
  if ((counts.array() == top).count() > 1) return -1;
  return static_cast<int>(best);
}

SpikeTargetTask gen_spike_target_task(Eigen::Index n_inputs, Eigen::Index n_outputs,
                                      Eigen::Index steps, double dt, double input_rate_hz,
                                      int spikes_per_output, std::uint64_t seed) {
  if (spikes_per_output < 0 || spikes_per_output > steps) {
    throw ConfigError("spike target task: spike count out of range");
  }
  Rng rng(seed);
  SpikeTargetTask task;
  task.input = gen_poisson_raster(
      std::vector<double>(static_cast<std::size_t>(n_inputs), input_rate_hz), steps, dt,
      rng.next_u64());
  task.target = SpikeRaster::Zero(steps, n_outputs);
  // Evenly spaced slots with a random offset inside each slot; the first
  // tenth of the trial stays free so that the input has time to drive the
  // network.
  const Eigen::Index lead = steps / 10;
  const Eigen::Index usable = steps - lead;
  for (Eigen::Index k = 0; k < n_outputs; ++k) {
    for (int s = 0; s < spikes_per_output; ++s) {
      const Eigen::Index lo = lead + usable * s / spikes_per_output;
      const Eigen::Index hi = lead + usable * (s + 1) / spikes_per_output;
      const auto width = static_cast<std::uint64_t>(std::max<Eigen::Index>(hi - lo, 1));
      task.target(lo + static_cast<Eigen::Index>(rng.below(width)), k) = 1.0;
    }
  }
  return task;
}

}  // namespace spikegrad
