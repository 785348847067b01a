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

#include "spikegrad/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace spikegrad {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'P', 'K', 'G'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes;
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    bytes[k] = static_cast<char>((value >> (8 * k)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw ConfigError("checkpoint: truncated data");
  T value = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) value |= static_cast<T>(bytes[k]) << (8 * k);
  return value;
}

std::uint32_t checked_u32(Eigen::Index n) {
  if (n < 0 || n > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("checkpoint: dimension does not fit in u32");
  }
  return static_cast<std::uint32_t>(n);
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put(out, checked_u32(m.rows()));
  put(out, checked_u32(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put(out, std::bit_cast<std::uint64_t>(m(r, c)));
  }
}

Matrix get_matrix(std::istream& in) {
  const auto rows = get<std::uint32_t>(in);
  const auto cols = get<std::uint32_t>(in);
  // Guards against allocating absurd sizes from a corrupt header.
  if (static_cast<std::uint64_t>(rows) * cols > (std::uint64_t{1} << 32)) {
    throw ConfigError("checkpoint: matrix too large");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = std::bit_cast<double>(get<std::uint64_t>(in));
    }
  }
  return m;
}

void put_list(std::ostream& out, const std::vector<Matrix>& list) {
  put(out, checked_u32(static_cast<Eigen::Index>(list.size())));
  for (const Matrix& m : list) put_matrix(out, m);
}

std::vector<Matrix> get_list(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::vector<Matrix> list;
  for (std::uint32_t k = 0; k < n; ++k) list.push_back(get_matrix(in));
  return list;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 ||
          std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) ==
              0);
}

bool same_bits(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!same_bits(a[k], b[k])) return false;
  }
  return true;
}

}  // namespace

Checkpoint Checkpoint::from_network(const NetworkParams& params, const FeedbackMatrices& feedback,
                                    std::uint64_t config_hash) {
  Checkpoint cp;
  cp.config_hash = config_hash;
  for (const LayerParams& layer : params.layers) {
    cp.w.push_back(layer.w);
    cp.v.push_back(layer.v);
  }
  cp.feedback = feedback;
  return cp;
}

void Checkpoint::apply_to(NetworkParams& params) const {
  if (params.layers.size() != w.size()) throw ShapeError("checkpoint: layer count mismatch");
  for (std::size_t l = 0; l < w.size(); ++l) {
    LayerParams& layer = params.layers[l];
    if (layer.w.rows() != w[l].rows() || layer.w.cols() != w[l].cols() ||
        layer.v.has_value() != v[l].has_value()) {
      throw ShapeError("checkpoint: layer " + std::to_string(l + 1) + " shape mismatch");
    }
    layer.w = w[l];
    layer.v = v[l];
  }
  params.validate();
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (config_hash != other.config_hash || feedback.seed != other.feedback.seed) return false;
  if (!same_bits(w, other.w) || v.size() != other.v.size()) return false;
  for (std::size_t l = 0; l < v.size(); ++l) {
    if (v[l].has_value() != other.v[l].has_value()) return false;
    if (v[l] && !same_bits(*v[l], *other.v[l])) return false;
  }
  return same_bits(feedback.g, other.feedback.g) && same_bits(feedback.h, other.feedback.h);
}

void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  if (checkpoint.v.size() != checkpoint.w.size()) throw ShapeError("checkpoint: W/V mismatch");
  out.write(kMagic.data(), kMagic.size());
  put(out, Checkpoint::kVersion);
  put(out, checkpoint.config_hash);
  put(out, checked_u32(static_cast<Eigen::Index>(checkpoint.w.size())));
  for (std::size_t l = 0; l < checkpoint.w.size(); ++l) {
    const bool has_v = checkpoint.v[l].has_value();
    put(out, std::uint32_t{has_v ? 1u : 0u});
    put_matrix(out, checkpoint.w[l]);
    if (has_v) put_matrix(out, *checkpoint.v[l]);
  }
  put(out, checkpoint.feedback.seed);
  put_list(out, checkpoint.feedback.g);
  put_list(out, checkpoint.feedback.h);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError("checkpoint: bad magic bytes");
  const auto version = get<std::uint32_t>(in);
  if (version != Checkpoint::kVersion) {
    throw ConfigError("checkpoint: unsupported format version " + std::to_string(version));
  }
  Checkpoint cp;
  cp.config_hash = get<std::uint64_t>(in);
  const auto n_layers = get<std::uint32_t>(in);
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const auto flags = get<std::uint32_t>(in);
    if ((flags & ~1u) != 0) throw ConfigError("checkpoint: unknown layer flags");
    cp.w.push_back(get_matrix(in));
    cp.v.push_back((flags & 1u) ? std::optional<Matrix>(get_matrix(in)) : std::nullopt);
  }
  cp.feedback.seed = get<std::uint64_t>(in);
  cp.feedback.g = get_list(in);
  cp.feedback.h = get_list(in);
  return cp;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  save_checkpoint(out, checkpoint);
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace spikegrad
