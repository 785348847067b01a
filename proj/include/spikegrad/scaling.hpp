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
#include <iosfwd>
#include <vector>

#include "spikegrad/common.hpp"

namespace spikegrad {

/// Auxiliary learning-state bytes of one layer of N LIF neurons driven by N
/// inputs, measured from short runs of each method.
struct ScalingRow {
  Eigen::Index n = 0;
  std::size_t synapses = 0;
  std::size_t rtrl_bytes = 0;         // full sensitivity state
  std::size_t eligibility_bytes = 0;  // per-synapse SuperSpike traces
  std::size_t local_bytes = 0;        // layer-local error traces
};

/// RTRL is measured only up to `rtrl_max_n` neurons (0 in larger rows).
std::vector<ScalingRow> scaling_report(const std::vector<Eigen::Index>& sizes,
                                       Eigen::Index steps = 10, std::uint64_t seed = 1,
                                       Eigen::Index rtrl_max_n = 64);

/// Header N,synapses,rtrl_bytes,eligibility_bytes,local_bytes.
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
/// Least squares in log-log space; the slope is the scaling exponent.
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spikegrad
