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

#include <iosfwd>
#include <string>
#include <vector>

#include "spikegrad/backward.hpp"
#include "spikegrad/config.hpp"
#include "spikegrad/spiketime.hpp"

namespace spikegrad {

struct GradcheckRow {
  std::string block;        // e.g. "layer1.W"
  double analytic = 0.0;    // max-norm of the analytic block
  double numeric = 0.0;     // max-norm of the finite-difference block
  double rel_error = 0.0;   // ||a - f||_inf / max(||a||_inf, ||f||_inf, floor)
  bool all_zero = false;    // analytic block is exactly zero
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;
  double tolerance = 1e-3;

  double max_rel_error() const;
  bool passed() const { return max_rel_error() <= tolerance; }
};

// Denominator floor of the relative error, so blocks whose true gradient is
// zero compare finite-difference noise against an absolute scale.
inline constexpr double kGradcheckFloor = 1e-8;

double block_relative_error(const Matrix& analytic, const Matrix& numeric);

/// Central differences of the trial loss against the surrogate reverse pass
/// (or RTRL when `use_rtrl`). Meaningful in soft-forward mode, where the
/// surrogate is replaced by the gate's true derivative.
GradcheckReport gradcheck_network(const NetworkParams& params, const SpikeRaster& input,
                                  const LossSpec& loss, const BackwardOptions& options,
                                  const SpikeFunction& spike_fn, bool use_rtrl = false,
                                  double step = 1e-5, double tolerance = 1e-3);

/// Central differences of the summed XOR loss against the closed-form
/// spike-time gradient.
GradcheckReport gradcheck_event(const EventNet& net, const std::vector<XorTrial>& trials,
                                const QuiescencePolicy& policy = {}, double step = 1e-6,
                                double tolerance = 1e-3);

/// Builds the config's network and first training sample and checks it.
GradcheckReport gradcheck(const ExperimentConfig& config);

/// CSV with header block,analytic,numeric,rel_error,status where status is
/// pass, fail or zero (analytic block identically zero).
void write_gradcheck_csv(std::ostream& out, const GradcheckReport& report);

}  // namespace spikegrad
