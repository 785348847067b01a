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

#include "spikegrad/surrogates.hpp"

#include <cmath>
#include <string>

#include "spikegrad/common.hpp"

namespace spikegrad {

double default_surrogate_scale(SurrogateKind kind) {
  return kind == SurrogateKind::kFastSigmoid ? 10.0 : 1.0;
}

SurrogateSpec SurrogateSpec::with_default_scale(SurrogateKind kind) {
  return SurrogateSpec{kind, default_surrogate_scale(kind)};
}

void SurrogateSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("surrogate scale must be positive and finite, got " +
                      std::to_string(scale));
  }
}

double surrogate_derivative(const SurrogateSpec& spec, double u, double threshold) {
  const double dist = std::abs(u - threshold);
  if (!std::isfinite(dist)) return 0.0;
  const double x = spec.scale * dist;
  switch (spec.kind) {
    case SurrogateKind::kPiecewiseLinear:
      return x < 1.0 ? 1.0 - x : 0.0;
    case SurrogateKind::kFastSigmoid: {
      const double d = 1.0 + x;
      return 1.0 / (d * d);
    }
    case SurrogateKind::kExponential:
      return std::exp(-x);
    case SurrogateKind::kHeaviside:
      return 0.0;
  }
  return 0.0;
}

SurrogateKind parse_surrogate_kind(std::string_view name) {
  if (name == "linear") return SurrogateKind::kPiecewiseLinear;
  if (name == "fastsig") return SurrogateKind::kFastSigmoid;
  if (name == "exp") return SurrogateKind::kExponential;
  if (name == "hard") return SurrogateKind::kHeaviside;
  throw ConfigError("unknown surrogate '" + std::string(name) +
                    "' (expected linear|fastsig|exp|hard)");
}

std::string_view surrogate_name(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::kPiecewiseLinear: return "linear";
    case SurrogateKind::kFastSigmoid: return "fastsig";
    case SurrogateKind::kExponential: return "exp";
    case SurrogateKind::kHeaviside: return "hard";
  }
  return "?";
}

}  // namespace spikegrad
