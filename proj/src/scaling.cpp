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

#include "spikegrad/scaling.hpp"

#include <cmath>
#include <ostream>

#include "spikegrad/credit.hpp"
#include "spikegrad/forward_learn.hpp"
#include "spikegrad/tasks.hpp"

namespace spikegrad {

std::vector<ScalingRow> scaling_report(const std::vector<Eigen::Index>& sizes, Eigen::Index steps,
                                       std::uint64_t seed, Eigen::Index rtrl_max_n) {
  std::vector<ScalingRow> rows;
  for (Eigen::Index n : sizes) {
    if (n < 1) throw ConfigError("scaling report: sizes must be positive");
    Rng rng(seed + static_cast<std::uint64_t>(n));
    const NeuronConfig cfg = NeuronConfig::from_time_constants(1e-3, 5e-3, 10e-3);
    NetworkParams params;
    params.layers.push_back(LayerParams{random_feedback(n, n, rng) * 3.0, std::nullopt, cfg});
    const SpikeRaster input = gen_poisson_raster(
        std::vector<double>(static_cast<std::size_t>(n), 50.0), steps, cfg.dt, rng.next_u64());
    const SpikeRaster target = SpikeRaster::Zero(steps, n);
    const LossSpec loss = LossSpec::van_rossum(target, 10e-3);

    ScalingRow row;
    row.n = n;
    row.synapses = static_cast<std::size_t>(n * n);
    if (n <= rtrl_max_n) {
      row.rtrl_bytes = rtrl(params, input, loss, RtrlOptions{{}, true}).state_bytes;
    }
    NetworkParams copy = params;
    row.eligibility_bytes = superspike(copy, nullptr, input, target, {}).state_bytes;

    const Trajectory traj = run_network(params, input);
    const LayerTrajectoryView view{traj.presynaptic(0), traj.layers[0], cfg};
    const Matrix g = random_feedback(n, n, rng);
    row.local_bytes = local_error_update(view, g, Matrix::Zero(steps, n), {}).state_bytes;
    rows.push_back(row);
  }
  return rows;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
  out << "N,synapses,rtrl_bytes,eligibility_bytes,local_bytes\n";
  for (const ScalingRow& r : rows) {
    out << r.n << ',' << r.synapses << ',' << r.rtrl_bytes << ',' << r.eligibility_bytes << ','
        << r.local_bytes << '\n';
  }
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("linear_fit: need >= 2 pairs");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw ShapeError("linear_fit: x has no spread");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw ShapeError("loglog_fit: values must be positive");
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(y[k]));
  }
  return linear_fit(lx, ly);
}

}  // namespace spikegrad
