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

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "spikegrad/trainer.hpp"

using namespace spikegrad;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.inputs = 8;
  c.hidden = {8};
  c.steps = 30;
  c.train_per_class = 2;
  c.test_per_class = 1;
  c.batch_size = 3;
  c.epochs = 2;
  c.weight_scale = 2.0;
  c.learning_rate = 1e-3;
  return c;
}

std::string csv_of(const TrainResult& r) {
  std::ostringstream out;
  write_metrics_csv(out, r.metrics);
  return out.str();
}

}  // namespace

TEST_CASE("parallel_for visits every index and rethrows the first failure") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  std::atomic<int> count{0};
  CHECK_THROWS_WITH(parallel_for(50, 3,
                                 [&](std::size_t i) {
                                   ++count;
                                   if (i == 7 || i == 30) {
                                     throw std::runtime_error("fail " + std::to_string(i));
                                   }
                                 }),
                    "fail 7");
  CHECK(count == 50);
  CHECK(worker_count() >= 1);
}

TEST_CASE("metrics csv layout") {
  std::ostringstream out;
  write_metrics_csv(out, {MetricsRow{0, "train", 1.5, 0.25, 0.0}});
  CHECK(out.str() == "epoch,split,loss,accuracy,wall_ms\n0,train,1.5,0.25,0\n");
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  ExperimentConfig c = small_config();
  c.learning_rate = 0.0;
  const TrainResult r = train(c);
  Rng rng(c.seed);
  const NetworkParams init = build_network(c, rng);
  for (std::size_t l = 0; l < init.layers.size(); ++l) {
    CHECK(r.params.layers[l].w == init.layers[l].w);
  }
  // Every epoch evaluates the same network.
  const MetricsRow& last_train = r.metrics[r.metrics.size() - 2];
  REQUIRE(last_train.split == "train");
  CHECK(r.metrics.front().loss == last_train.loss);
}

TEST_CASE("training output is reproducible and independent of worker count") {
  ExperimentConfig c = small_config();
  c.method = Method::kFa;
  TrainOptions one{false, 1};
  TrainOptions four{false, 4};
  const TrainResult a = train(c, one);
  const TrainResult b = train(c, four);
  const TrainResult again = train(c, four);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(csv_of(b) == csv_of(again));
  CHECK(a.checkpoint == b.checkpoint);
  // Rows: epoch 0 plus one per epoch, each with a train and a test split.
  CHECK(a.metrics.size() == static_cast<std::size_t>(2 * (c.epochs + 1)));
  CHECK(a.metrics[0].split == "train");
  CHECK(a.metrics[1].split == "test");
  for (const auto& row : a.metrics) CHECK(row.wall_ms == 0.0);
}

TEST_CASE("feedback matrices stay fixed through training") {
  ExperimentConfig c = small_config();
  c.method = Method::kDfa;
  c.epochs = 3;
  Rng rng(c.seed);
  const NetworkParams init = build_network(c, rng);
  const FeedbackMatrices before = build_feedback(c, init);
  const TrainResult r = train(c);
  CHECK(r.feedback == before);
  CHECK(r.checkpoint.feedback == before);
  CHECK(r.alignment_degrees.size() == static_cast<std::size_t>(c.epochs));
}

TEST_CASE("every gradient method runs with every smooth surrogate") {
  for (Method m : {Method::kBptt, Method::kRtrl, Method::kSuperSpike, Method::kFa, Method::kDfa,
                   Method::kLocal}) {
    for (SurrogateKind s :
         {SurrogateKind::kPiecewiseLinear, SurrogateKind::kFastSigmoid, SurrogateKind::kExponential}) {
      ExperimentConfig c = small_config();
      c.method = m;
      c.surrogate = s;
      CAPTURE(method_name(m));
      CAPTURE(surrogate_name(s));
      const TrainResult r = train(c);
      CHECK_FALSE(r.diverged);
      CHECK(r.metrics.size() == 6);
      for (const auto& row : r.metrics) {
        CHECK(std::isfinite(row.loss));
        CHECK(row.accuracy >= 0.0);
        CHECK(row.accuracy <= 1.0);
      }
    }
  }
}

TEST_CASE("online superspike and the spike-target task train") {
  ExperimentConfig c = small_config();
  c.method = Method::kSuperSpike;
  c.online = true;
  CHECK_FALSE(train(c).diverged);

  ExperimentConfig t = small_config();
  t.task = TaskKind::kSpikeTarget;
  t.epochs = 3;
  const TrainResult r = train(t);
  CHECK_FALSE(r.diverged);
  // One training trial and no test split.
  CHECK(r.metrics.size() == 4);
}

TEST_CASE("bptt learns the pattern task above chance") {
  ExperimentConfig c;
  c.inputs = 16;
  c.hidden = {32};
  c.steps = 60;
  c.epochs = 15;
  c.learning_rate = 1e-3;
  const TrainResult r = train(c);
  REQUIRE_FALSE(r.diverged);
  const MetricsRow& first = r.metrics.front();
  const MetricsRow& last = r.metrics[r.metrics.size() - 2];
  CHECK(last.split == "train");
  CHECK(last.loss < first.loss);
  CHECK(last.accuracy > 1.0 / 3.0 + 0.2);
}

TEST_CASE("divergence stops training and keeps the last good parameters") {
  ExperimentConfig c = small_config();
  c.learning_rate = 1e308;
  c.epochs = 5;
  const TrainResult r = train(c);
  CHECK(r.diverged);
  CHECK_FALSE(r.divergence_message.empty());
  bool finite = true;
  for (const auto& layer : r.params.layers) finite = finite && layer.w.allFinite();
  CHECK(finite);
  for (const auto& w : r.checkpoint.w) CHECK(w.allFinite());
}

TEST_CASE("xor runs through the trainer") {
  ExperimentConfig c;
  c.task = TaskKind::kXor;
  c.method = Method::kSpikeTime;
  c.learning_rate = 0.1;
  c.epochs = 2000;
  const TrainResult r = train(c);
  REQUIRE(r.xor_result.has_value());
  CHECK(r.xor_result->solved);
  CHECK(r.metrics.back().accuracy == 1.0);
}

TEST_CASE("alignment angle helper") {
  Matrix a(1, 2), b(1, 2);
  a << 1.0, 0.0;
  b << 0.0, 2.0;
  CHECK(angle_degrees(a, b) == doctest::Approx(90.0));
  CHECK(angle_degrees(a, a) == doctest::Approx(0.0));
  CHECK(angle_degrees(a, -a) == doctest::Approx(180.0));
  CHECK(std::isnan(angle_degrees(a, Matrix::Zero(1, 2))));
}
