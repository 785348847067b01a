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

#include <sstream>
#include <string>

#include "helpers.hpp"
#include "spikegrad/gradcheck.hpp"
#include "spikegrad/scaling.hpp"

using namespace spikegrad;

TEST_CASE("block relative error") {
  Matrix a(1, 2), f(1, 2);
  a << 1.0, 2.0;
  f << 1.0, 2.002;
  CHECK(block_relative_error(a, f) == doctest::Approx(0.002 / 2.002));
  CHECK(block_relative_error(Matrix::Zero(1, 2), Matrix::Zero(1, 2)) == 0.0);
  // Tiny numeric noise against an exactly zero block stays below the floor.
  Matrix noise = Matrix::Constant(1, 2, 1e-12);
  CHECK(block_relative_error(Matrix::Zero(1, 2), noise) == doctest::Approx(1e-4));
}

TEST_CASE("soft-forward gradcheck covers every block, including rtrl") {
  Rng rng(8);
  const NetworkParams p = spikegrad::testing::random_network({3, 4, 2}, rng, true, true, 2.0);
  const SpikeRaster in = spikegrad::testing::random_raster(20, 3, 0.4, rng);
  const BackwardOptions opts{};
  const GradcheckReport r = gradcheck_network(p, in, LossSpec::cross_entropy(0), opts,
                                              SpikeFunction{5.0});
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].block == "layer1.W");
  CHECK(r.rows[1].block == "layer1.V");
  CHECK(r.rows[2].block == "layer2.W");
  CHECK(r.passed());
  const GradcheckReport viartrl = gradcheck_network(p, in, LossSpec::cross_entropy(0), opts,
                                                    SpikeFunction{5.0}, true);
  CHECK(viartrl.passed());
}

TEST_CASE("hard-threshold surrogate gradients are not true gradients") {
  // Finite differences of a step-function network are zero almost
  // everywhere, so the surrogate reverse pass fails the check.
  Rng rng(9);
  const NetworkParams p = spikegrad::testing::random_network({3, 6, 2}, rng, false, false, 4.0);
  const SpikeRaster in = spikegrad::testing::random_raster(30, 3, 0.4, rng);
  const LossSpec loss =
      LossSpec::van_rossum(spikegrad::testing::random_raster(30, 2, 0.2, rng), 10e-3);
  const GradcheckReport r = gradcheck_network(p, in, loss, BackwardOptions{}, SpikeFunction{});
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].analytic > 0.0);
  CHECK(r.rows[0].numeric == 0.0);
  CHECK_FALSE(r.passed());
}

TEST_CASE("gradcheck from a config and csv output") {
  ExperimentConfig c;
  c.inputs = 3;
  c.hidden = {4};
  c.classes = 2;
  c.steps = 20;
  c.soft_steepness = 5.0;
  c.weight_scale = 2.0;
  const GradcheckReport r = gradcheck(c);
  CHECK(r.passed());
  std::ostringstream out;
  write_gradcheck_csv(out, r);
  const std::string csv = out.str();
  CHECK(csv.rfind("block,analytic,numeric,rel_error,status\n", 0) == 0);
  CHECK(csv.find("layer2.W,") != std::string::npos);

  ExperimentConfig x;
  x.task = TaskKind::kXor;
  x.method = Method::kSpikeTime;
  const GradcheckReport rx = gradcheck(x);
  CHECK(rx.rows.size() == 2);
}

TEST_CASE("scaling report measures method state") {
  const auto rows = scaling_report({4, 8, 16}, 5, 1, 8);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    const auto n = static_cast<std::size_t>(row.n);
    CHECK(row.synapses == n * n);
    CHECK(row.local_bytes == 3 * n * sizeof(double));
    CHECK(row.eligibility_bytes > row.local_bytes);
  }
  CHECK(rows[0].rtrl_bytes == 4 * 64 * sizeof(double));
  CHECK(rows[1].rtrl_bytes == 4 * 512 * sizeof(double));
  CHECK(rows[2].rtrl_bytes == 0);  // above the measurement cap

  std::ostringstream out;
  write_scaling_csv(out, rows);
  CHECK(out.str().rfind("N,synapses,rtrl_bytes,eligibility_bytes,local_bytes\n4,16,", 0) == 0);
}

TEST_CASE("least-squares fits") {
  const LinearFit f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  const LinearFit g = loglog_fit({2, 4, 8}, {8, 64, 512});
  CHECK(g.slope == doctest::Approx(3.0));
  CHECK_THROWS_AS(linear_fit({1}, {2}), ShapeError);
}
