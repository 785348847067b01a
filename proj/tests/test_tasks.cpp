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

#include "spikegrad/loss.hpp"
#include "spikegrad/tasks.hpp"

using namespace spikegrad;

TEST_CASE("poisson raster rate edge cases") {
  const SpikeRaster silent = gen_poisson_raster({0.0, 0.0}, 500, 1e-3, 1);
  CHECK(silent.sum() == 0.0);
  const SpikeRaster always = gen_poisson_raster({1000.0}, 50, 1e-3, 1);
  CHECK(always.sum() == 50.0);
  CHECK_THROWS_AS(gen_poisson_raster({-1.0}, 10, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(gen_poisson_raster({2000.0}, 10, 1e-3, 1), ConfigError);
}

TEST_CASE("poisson counts stay within three binomial standard deviations") {
  const double rate = 50.0, dt = 1e-3;
  const Eigen::Index steps = 2000, width = 40;
  const SpikeRaster r = gen_poisson_raster(std::vector<double>(width, rate), steps, dt, 7);
  const double p = rate * dt;
  const double n = static_cast<double>(steps * width);
  const double mean = n * p;
  const double sd = std::sqrt(n * p * (1.0 - p));
  CHECK(std::abs(r.sum() - mean) < 3.0 * sd);
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    CHECK((r.data()[k] == 0.0 || r.data()[k] == 1.0));
  }
}

TEST_CASE("poisson raster is a function of the seed") {
  const std::vector<double> rates(8, 80.0);
  CHECK(gen_poisson_raster(rates, 100, 1e-3, 5) == gen_poisson_raster(rates, 100, 1e-3, 5));
  CHECK(gen_poisson_raster(rates, 100, 1e-3, 5) != gen_poisson_raster(rates, 100, 1e-3, 6));
}

TEST_CASE("jitter deletes and shifts") {
  const SpikeRaster base = gen_poisson_raster(std::vector<double>(10, 100.0), 200, 1e-3, 3);
  Rng rng(1);
  CHECK(jitter_raster(base, JitterSpec::none(), rng) == base);

  JitterSpec del_all{1.0, 0};
  CHECK(jitter_raster(base, del_all, rng).sum() == 0.0);

  // Shift only: every surviving spike lies within one step of an original.
  JitterSpec shift{0.0, 1};
  const SpikeRaster moved = jitter_raster(base, shift, rng);
  CHECK(moved.sum() <= base.sum());
  for (Eigen::Index n = 0; n < moved.rows(); ++n) {
    for (Eigen::Index c = 0; c < moved.cols(); ++c) {
      if (moved(n, c) == 0.0) continue;
      bool near = base(n, c) == 1.0;
      if (n > 0) near = near || base(n - 1, c) == 1.0;
      if (n + 1 < base.rows()) near = near || base(n + 1, c) == 1.0;
      CHECK(near);
    }
  }

  // Deletion only: the surviving fraction is close to 0.9.
  const SpikeRaster thinned = jitter_raster(base, JitterSpec{0.1, 0}, rng);
  const double kept = thinned.sum() / base.sum();
  CHECK(kept > 0.8);
  CHECK(kept < 0.97);
  CHECK(((thinned.array() == 1.0) <= (base.array() == 1.0)).all());
}

TEST_CASE("pattern task structure") {
  PatternTaskSpec spec;
  spec.n_inputs = 16;
  spec.steps = 80;
  const PatternDataset d = gen_pattern_task(spec, 11);
  REQUIRE(d.prototypes.size() == 3);
  CHECK(d.train.size() == 30);
  CHECK(d.test.size() == 15);
  for (std::size_t a = 0; a < d.prototypes.size(); ++a) {
    CHECK(d.prototypes[a].rows() == 80);
    CHECK(d.prototypes[a].cols() == 16);
    for (std::size_t b = a + 1; b < d.prototypes.size(); ++b) {
      CHECK(hamming_distance(d.prototypes[a], d.prototypes[b]) > 0);
    }
  }
  int counts[3] = {0, 0, 0};
  for (const auto& s : d.train) ++counts[s.label];
  CHECK(counts[0] == 10);
  CHECK(counts[1] == 10);
  CHECK(counts[2] == 10);

  const PatternDataset again = gen_pattern_task(spec, 11);
  CHECK(again.train[7].input == d.train[7].input);
  CHECK(gen_pattern_task(spec, 12).prototypes[0] != d.prototypes[0]);
}

TEST_CASE("jittered trials stay closest to their own prototype") {
  const PatternDataset d = gen_pattern_task(PatternTaskSpec{}, 3);
  const double decay = kernel_decay(1e-3, 10e-3);
  int right = 0, total = 0;
  for (const auto* split : {&d.train, &d.test}) {
    for (const auto& s : *split) {
      right += nearest_prototype(s.input, d.prototypes, decay) == s.label ? 1 : 0;
      ++total;
    }
  }
  CHECK(right == total);
}

TEST_CASE("class targets and spike-count decoding") {
  const SpikeRaster t = class_target_raster(1, 3, 25, 10);
  CHECK(t.sum() == 2.0);
  CHECK(t(9, 1) == 1.0);
  CHECK(t(19, 1) == 1.0);
  CHECK(t.col(0).sum() == 0.0);
  CHECK(spike_count_prediction(t) == 1);
  CHECK(spike_count_prediction(SpikeRaster::Zero(5, 3)) == -1);
  SpikeRaster tie = SpikeRaster::Zero(5, 3);
  tie(0, 0) = tie(3, 2) = 1.0;
  CHECK(spike_count_prediction(tie) == -1);
  CHECK_THROWS_AS(class_target_raster(3, 3, 10, 5), ContractError);
  CHECK_THROWS_AS(class_target_raster(0, 3, 10, 0), ConfigError);
}

TEST_CASE("spike target task") {
  const SpikeTargetTask task = gen_spike_target_task(20, 3, 100, 1e-3, 40.0, 4, 9);
  CHECK(task.input.rows() == 100);
  CHECK(task.input.cols() == 20);
  REQUIRE(task.target.cols() == 3);
  for (Eigen::Index c = 0; c < 3; ++c) CHECK(task.target.col(c).sum() == 4.0);
  CHECK(gen_spike_target_task(20, 3, 100, 1e-3, 40.0, 4, 9).target == task.target);
  CHECK_THROWS_AS(gen_spike_target_task(2, 1, 10, 1e-3, 40.0, 11, 9), ConfigError);
}
