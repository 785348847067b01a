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
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spikegrad/backward.hpp"
#include "spikegrad/checkpoint.hpp"
#include "spikegrad/config.hpp"
#include "spikegrad/spiketime.hpp"

namespace spikegrad {

/// Worker count for batch evaluation: SPIKEGRAD_THREADS when set to a
/// positive integer, otherwise the hardware concurrency.
int worker_count();

/// Runs fn(0) ... fn(n-1) on up to `workers` threads. The first exception by
/// index is rethrown after all workers finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct MetricsRow {
  int epoch = 0;
  std::string split;  // train | test
  double loss = 0.0;
  double accuracy = 0.0;
  double wall_ms = 0.0;
};

/// Header epoch,split,loss,accuracy,wall_ms.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

/// One training example with its loss.
struct Sample {
  SpikeRaster input;
  LossSpec loss;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Samples for the pattern or superspike-target task.
Dataset build_dataset(const ExperimentConfig& config);

/// Feedback matrices the method needs (empty lists for exact methods).
FeedbackMatrices build_feedback(const ExperimentConfig& config, const NetworkParams& params);

struct SampleGradient {
  GradientSet grad;
  double loss = 0.0;
  // Exact surrogate gradient on the same trajectory, for alignment angles.
  std::optional<GradientSet> reference;
};

/// Per-trial weight gradient of the configured method.
SampleGradient sample_gradient(const ExperimentConfig& config, const NetworkParams& params,
                               const FeedbackMatrices& feedback, const Sample& sample,
                               bool with_reference = false);

struct Evaluation {
  double loss = 0.0;      // mean over samples
  double accuracy = 0.0;  // fraction in [0, 1]
};

Evaluation evaluate(const ExperimentConfig& config, const NetworkParams& params,
                    const std::vector<Sample>& samples, int workers);

// Angle in degrees between two flattened updates; NaN if either is zero.
double angle_degrees(const Matrix& a, const Matrix& b);

struct TrainOptions {
  // When set, wall_ms holds milliseconds since the start of training;
  // otherwise it is written as 0 so that repeated runs are byte-identical.
  bool record_wall_time = false;
  int workers = 0;  // 0: worker_count()
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  NetworkParams params;  // last good parameters
  FeedbackMatrices feedback;
  Checkpoint checkpoint;
  bool diverged = false;
  std::string divergence_message;
  // Per epoch, angle between the method's first-hidden-layer update and the
  // exact surrogate update summed over the epoch (fa, dfa and local only).
  std::vector<double> alignment_degrees;
  std::optional<XorTrainResult> xor_result;
};

/// Plain SGD: W <- W - lr * sum of per-trial gradients over each mini-batch.
/// Epoch 0 rows evaluate the initial network. On a non-finite loss, state or
/// gradient training stops, `diverged` is set and the checkpoint holds the
/// parameters after the last completed epoch.
TrainResult train(const ExperimentConfig& config, const TrainOptions& options = {});

}  // namespace spikegrad
