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

#include <cmath>
#include <cstdint>
#include <vector>

#include "spikegrad/dynamics.hpp"
#include "spikegrad/tasks.hpp"

namespace spikegrad::testing {

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double sd, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = sd * rng.normal();
  return m;
}

// Layered network with the given sizes (sizes[0] = inputs). The last layer is
// a readout when `readout` is set.
inline NetworkParams random_network(const std::vector<Eigen::Index>& sizes, Rng& rng,
                                    bool readout, bool recurrent = false, double scale = 1.0,
                                    NeuronConfig cfg = NeuronConfig::from_decays(0.8, 0.9)) {
  NetworkParams p;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    const bool top = l + 1 == sizes.size();
    const double sd = scale / std::sqrt(static_cast<double>(sizes[l - 1]));
    LayerParams layer{gaussian(sizes[l], sizes[l - 1], sd, rng), std::nullopt,
                      top && readout ? cfg.as_readout() : cfg};
    if (recurrent && !top) layer.v = gaussian(sizes[l], sizes[l], 0.3 * sd, rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

inline SpikeRaster random_raster(Eigen::Index steps, Eigen::Index width, double p, Rng& rng) {
  SpikeRaster r = SpikeRaster::Zero(steps, width);
  for (Eigen::Index k = 0; k < r.size(); ++k) r.data()[k] = rng.bernoulli(p) ? 1.0 : 0.0;
  return r;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace spikegrad::testing
