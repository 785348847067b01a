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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spikegrad/credit.hpp"
#include "spikegrad/dynamics.hpp"

namespace spikegrad {

/// Trained weights, feedback matrices and the hash of the config that
/// produced them. Neuron constants are not stored; they come from the config.
///
/// Binary layout, all integers and doubles little-endian:
///   "SPKG"  u32 version  u64 config_hash
///   u32 n_layers, then per layer: u32 flags (bit 0: has V), W, [V]
///   u64 feedback_seed
///   u32 n_g, matrices   u32 n_h, matrices
/// where each matrix is u32 rows, u32 cols, rows*cols f64 in row-major order.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t config_hash = 0;
  std::vector<Matrix> w;
  std::vector<std::optional<Matrix>> v;
  FeedbackMatrices feedback;

  static Checkpoint from_network(const NetworkParams& params, const FeedbackMatrices& feedback,
                                 std::uint64_t config_hash);
  // Copies the stored weights into `params`, which must have matching shapes.
  void apply_to(NetworkParams& params) const;

  bool operator==(const Checkpoint& other) const;
};

void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
/// Throws ConfigError on a bad magic, unsupported version or truncated data.
Checkpoint load_checkpoint(std::istream& in);

void save_checkpoint_file(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace spikegrad
