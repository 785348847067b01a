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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

namespace spikegrad::testing {

// Fixed-step RK4 integration of dU/dt = I, dI/dt = -I, with each input
// adding its weight to I on arrival. Steps are split at arrival times so the
// jumps land exactly. Returns the first upward crossing of `threshold`
// (linearly interpolated inside the step) or nothing before `t_end`.
inline std::optional<double> ode_fire_time(const std::vector<double>& weights,
                                           const std::vector<double>& times, double threshold,
                                           double h, double t_end) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  double u = 0.0, i = 0.0;
  double t = order.empty() ? 0.0 : times[order.front()];
  std::size_t next = 0;
  auto rk4 = [&](double dt) {
    // Linear system; the classical tableau written out.
    const double k1u = i, k1i = -i;
    const double k2u = i + 0.5 * dt * k1i, k2i = -(i + 0.5 * dt * k1i);
    const double k3u = i + 0.5 * dt * k2i, k3i = -(i + 0.5 * dt * k2i);
    const double k4u = i + dt * k3i, k4i = -(i + dt * k3i);
    u += dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    i += dt / 6.0 * (k1i + 2 * k2i + 2 * k3i + k4i);
  };
  while (t < t_end) {
    while (next < order.size() && times[order[next]] <= t) i += weights[order[next++]];
    double dt = h;
    if (next < order.size()) dt = std::min(dt, times[order[next]] - t);
    const double u0 = u;
    rk4(dt);
    if (u0 < threshold && u >= threshold) return t + dt * (threshold - u0) / (u - u0);
    t += dt;
  }
  return std::nullopt;
}

}  // namespace spikegrad::testing
