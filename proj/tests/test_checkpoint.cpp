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
#include "spikegrad/checkpoint.hpp"

using namespace spikegrad;

namespace {

Checkpoint sample_checkpoint() {
  Rng rng(4);
  const NetworkParams p = spikegrad::testing::random_network({3, 5, 4, 2}, rng, true, true);
  return Checkpoint::from_network(p, FeedbackMatrices::for_alignment(p, 77), 0xABCDEF);
}

std::string bytes_of(const Checkpoint& c) {
  std::ostringstream out;
  save_checkpoint(out, c);
  return out.str();
}

}  // namespace

TEST_CASE("checkpoint round-trip is exact") {
  const Checkpoint a = sample_checkpoint();
  const std::string bytes = bytes_of(a);
  CHECK(bytes.substr(0, 4) == "SPKG");
  std::istringstream in(bytes);
  const Checkpoint b = load_checkpoint(in);
  CHECK(b == a);
  CHECK(b.config_hash == 0xABCDEF);
  CHECK(b.feedback == a.feedback);
  CHECK(bytes_of(b) == bytes);
}

TEST_CASE("checkpoint restores weights into a network") {
  Rng rng(4);
  const NetworkParams p = spikegrad::testing::random_network({3, 5, 4, 2}, rng, true, true);
  const Checkpoint c = Checkpoint::from_network(p, {}, 1);
  Rng other(9);
  NetworkParams q = spikegrad::testing::random_network({3, 5, 4, 2}, other, true, true);
  c.apply_to(q);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    CHECK(q.layers[l].w == p.layers[l].w);
    CHECK(q.layers[l].v.has_value() == p.layers[l].v.has_value());
  }
  NetworkParams wrong = spikegrad::testing::random_network({3, 6, 4, 2}, other, true, true);
  CHECK_THROWS_AS(c.apply_to(wrong), ShapeError);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const std::string bytes = bytes_of(sample_checkpoint());
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream a(bad_magic);
  CHECK_THROWS_AS(load_checkpoint(a), ConfigError);

  std::string future = bytes;
  future[4] = 9;  // little-endian version field
  std::istringstream b(future);
  CHECK_THROWS_AS(load_checkpoint(b), ConfigError);

  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    std::istringstream c(bytes.substr(0, cut));
    CHECK_THROWS_AS(load_checkpoint(c), ConfigError);
  }
  CHECK_THROWS_AS(load_checkpoint_file("/nonexistent/ckpt.bin"), ConfigError);
}
