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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "spikegrad/common.hpp"
#include "spikegrad/surrogates.hpp"

using namespace spikegrad;

namespace {

const SurrogateKind kSmooth[] = {SurrogateKind::kPiecewiseLinear, SurrogateKind::kFastSigmoid,
                                 SurrogateKind::kExponential};

}  // namespace

TEST_CASE("surrogate worked examples") {
  CHECK(surrogate_derivative({SurrogateKind::kFastSigmoid, 1.0}, 1.0, 1.0) == 1.0);
  CHECK(surrogate_derivative({SurrogateKind::kPiecewiseLinear, 1.0}, 2.0, 1.0) == 0.0);
  CHECK(surrogate_derivative({SurrogateKind::kPiecewiseLinear, 1.0}, 0.0, 1.0) == 0.0);
  CHECK(surrogate_derivative({SurrogateKind::kExponential, 2.0}, 1.5, 1.0) ==
        doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(surrogate_derivative({SurrogateKind::kHeaviside, 3.0}, 1.1, 1.0) == 0.0);
  CHECK(surrogate_derivative({SurrogateKind::kHeaviside, 3.0}, 1.0, 1.0) == 0.0);
  CHECK(surrogate_derivative({SurrogateKind::kFastSigmoid, 10.0}, 1.1, 1.0) ==
        doctest::Approx(0.25));
  CHECK(surrogate_derivative({SurrogateKind::kPiecewiseLinear, 1.0}, 1.25, 1.0) ==
        doctest::Approx(0.75));
}

TEST_CASE("every smooth surrogate peaks at 1, is symmetric and bounded") {
  const double thr = 0.7;
  for (SurrogateKind kind : kSmooth) {
    for (double scale : {0.5, 1.0, 10.0}) {
      const SurrogateSpec spec{kind, scale};
      CHECK(surrogate_derivative(spec, thr, thr) == 1.0);
      double previous = 0.0;
      for (double u = thr - 5.0; u <= thr; u += 0.01) {
        const double d = surrogate_derivative(spec, u, thr);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(d >= previous);  // non-decreasing toward threshold
        CHECK(d == doctest::Approx(surrogate_derivative(spec, 2.0 * thr - u, thr)));
        previous = d;
      }
    }
  }
}

TEST_CASE("sharper scales narrow the surrogate around threshold") {
  for (SurrogateKind kind : kSmooth) {
    double previous = 1.0;
    for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
      const double d = surrogate_derivative({kind, scale}, 1.05, 1.0);
      if (previous > 0.0) {
        CHECK(d < previous);
      } else {
        CHECK(d == 0.0);
      }
      CHECK(surrogate_derivative({kind, scale}, 1.0, 1.0) == 1.0);
      previous = d;
    }
    CHECK(previous < 1e-3);
  }
}

TEST_CASE("non-finite threshold yields zero") {
  const double inf = std::numeric_limits<double>::infinity();
  for (SurrogateKind kind : kSmooth) {
    CHECK(surrogate_derivative(SurrogateSpec::with_default_scale(kind), 3.0, inf) == 0.0);
  }
}

TEST_CASE("default scales and validation") {
  CHECK(default_surrogate_scale(SurrogateKind::kFastSigmoid) == 10.0);
  CHECK(default_surrogate_scale(SurrogateKind::kPiecewiseLinear) == 1.0);
  CHECK(default_surrogate_scale(SurrogateKind::kExponential) == 1.0);
  CHECK_THROWS_AS((SurrogateSpec{SurrogateKind::kExponential, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((SurrogateSpec{SurrogateKind::kExponential, -1.0}.validate()), ConfigError);
  CHECK_THROWS_AS(
      (SurrogateSpec{SurrogateKind::kExponential, std::numeric_limits<double>::infinity()}
           .validate()),
      ConfigError);
}

TEST_CASE("surrogate names round-trip") {
  for (const char* name : {"linear", "fastsig", "exp", "hard"}) {
    CHECK(surrogate_name(parse_surrogate_kind(name)) == name);
  }
  CHECK_THROWS_AS(parse_surrogate_kind("sigmoid"), ConfigError);
}
