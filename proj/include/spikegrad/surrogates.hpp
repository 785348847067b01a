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

namespace spikegrad {

enum class SurrogateKind {
  kPiecewiseLinear,
  kFastSigmoid,
  kExponential,
  // Derivative of the true step: zero everywhere. Only useful to show that
  // gradients stop flowing through a hard threshold.
  kHeaviside,
};

/// Shape and sharpness of the stand-in for the step-function derivative.
/// Every kind peaks at exactly 1 when the membrane sits at threshold.
struct SurrogateSpec {
  SurrogateKind kind = SurrogateKind::kFastSigmoid;
  double scale = 10.0;

  static SurrogateSpec with_default_scale(SurrogateKind kind);
  void validate() const;
};

double default_surrogate_scale(SurrogateKind kind);

/// Surrogate of dS/dU evaluated at membrane value `u`.
///   piecewise linear: max(0, 1 - scale |u - threshold|)
///   fast sigmoid:     (1 + scale |u - threshold|)^-2
///   exponential:      exp(-scale |u - threshold|)
///   heaviside:        0
/// Returns 0 for a non-finite distance (e.g. non-spiking readouts whose
/// threshold is +inf).
double surrogate_derivative(const SurrogateSpec& spec, double u, double threshold);

// CLI names: linear | fastsig | exp | hard.
SurrogateKind parse_surrogate_kind(std::string_view name);
std::string_view surrogate_name(SurrogateKind kind);

}  // namespace spikegrad
