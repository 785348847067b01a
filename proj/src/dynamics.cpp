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

#include "spikegrad/dynamics.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace spikegrad {

namespace {

std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

Decays derive_decays(double dt, double tau_syn, double tau_mem) {
  if (!(dt > 0.0) || !(tau_syn > 0.0) || !(tau_mem > 0.0)) {
    throw ConfigError("dt, tau_syn and tau_mem must all be positive");
  }
  return Decays{std::exp(-dt / tau_syn), std::exp(-dt / tau_mem)};
}

NeuronConfig NeuronConfig::from_time_constants(double dt, double tau_syn, double tau_mem,
                                               double threshold) {
  const Decays d = derive_decays(dt, tau_syn, tau_mem);
  NeuronConfig cfg;
  cfg.dt = dt;
  cfg.tau_syn = tau_syn;
  cfg.tau_mem = tau_mem;
  cfg.alpha = d.alpha;
  cfg.beta = d.beta;
  cfg.threshold = threshold;
  cfg.validate();
  return cfg;
}

NeuronConfig NeuronConfig::from_decays(double alpha, double beta, double threshold) {
  NeuronConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.tau_syn = -cfg.dt / std::log(alpha);
  cfg.tau_mem = -cfg.dt / std::log(beta);
  cfg.threshold = threshold;
  cfg.validate();
  return cfg;
}

NeuronConfig NeuronConfig::as_readout() const {
  NeuronConfig cfg = *this;
  cfg.threshold = std::numeric_limits<double>::infinity();
  return cfg;
}

bool NeuronConfig::spiking() const { return std::isfinite(threshold); }

void NeuronConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
  if (!(threshold > kRestPotential)) {
    throw ConfigError("threshold must exceed the resting potential");
  }
}

void LayerParams::validate() const {
  if (w.size() == 0) throw ShapeError("layer has an empty weight matrix");
  if (!w.allFinite()) throw NumericError("non-finite feed-forward weight");
  if (v) {
    if (v->rows() != n_post() || v->cols() != n_post()) {
      throw ShapeError("recurrent matrix " + shape_str(v->rows(), v->cols()) +
                       " must be square with side " + std::to_string(n_post()));
    }
    if (!v->allFinite()) throw NumericError("non-finite recurrent weight");
  }
  cfg.validate();
}

Eigen::Index NetworkParams::n_inputs() const {
  return layers.empty() ? 0 : layers.front().n_pre();
}

Eigen::Index NetworkParams::n_outputs() const {
  return layers.empty() ? 0 : layers.back().n_post();
}

Eigen::Index NetworkParams::total_neurons() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers) n += layer.n_post();
  return n;
}

Eigen::Index NetworkParams::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers) {
    n += layer.w.size();
    if (layer.v) n += layer.v->size();
  }
  return n;
}

bool NetworkParams::recurrent() const {
  for (const auto& layer : layers) {
    if (layer.v) return true;
  }
  return false;
}

void NetworkParams::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    if (l > 0 && layers[l].n_pre() != layers[l - 1].n_post()) {
      throw ShapeError("layer " + std::to_string(l + 1) + " expects " +
                       std::to_string(layers[l].n_pre()) + " inputs but layer " +
                       std::to_string(l) + " has " + std::to_string(layers[l - 1].n_post()) +
                       " neurons");
    }
  }
}

double SpikeFunction::value(double u, double threshold) const {
  if (!std::isfinite(threshold)) return 0.0;
  if (soft()) return 1.0 / (1.0 + std::exp(-soft_steepness * (u - threshold)));
  return u >= threshold ? 1.0 : 0.0;
}

double SpikeFunction::derivative(double u, double threshold) const {
  if (!std::isfinite(threshold)) return 0.0;
  const double s = 1.0 / (1.0 + std::exp(-soft_steepness * (u - threshold)));
  return soft_steepness * s * (1.0 - s);
}

LayerState LayerState::zeros(Eigen::Index n) {
  return LayerState{Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
}

LayerState step_layer(const LayerState& state, const Vector& pre_spikes,
                      const LayerParams& params, const SpikeFunction& spike_fn) {
  const Eigen::Index n = params.n_post();
  if (pre_spikes.size() != params.n_pre()) {
    throw ShapeError("presynaptic vector has " + std::to_string(pre_spikes.size()) +
                     " entries, weights expect " + std::to_string(params.n_pre()));
  }
  if (state.i.size() != n || state.u.size() != n || state.s.size() != n) {
    throw ShapeError("layer state does not match " + std::to_string(n) + " neurons");
  }
  const NeuronConfig& cfg = params.cfg;

  LayerState next;
  next.i = cfg.alpha * state.i + params.w * pre_spikes;
  if (params.v) next.i.noalias() += *params.v * state.s;
  next.u = cfg.beta * state.u + state.i;
  if (cfg.spiking()) next.u -= state.s * (cfg.threshold - NeuronConfig::kRestPotential);
  next.s.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) next.s[k] = spike_fn.value(next.u[k], cfg.threshold);
  return next;
}

LayerState LayerTrace::at(Eigen::Index step) const {
  return LayerState{i.row(step).transpose(), u.row(step).transpose(),
                    s.row(step).transpose()};
}

const Matrix& Trajectory::presynaptic(std::size_t layer) const {
  return layer == 0 ? input : layers[layer - 1].s;
}

Trajectory run_network(const NetworkParams& params, const SpikeRaster& input,
                       Eigen::Index horizon, const SpikeFunction& spike_fn) {
  params.validate();
  if (input.cols() != params.n_inputs()) {
    throw ShapeError("input raster has " + std::to_string(input.cols()) +
                     " channels, network expects " + std::to_string(params.n_inputs()));
  }
  const Eigen::Index steps = horizon < 0 ? input.rows() : horizon;
  if (steps > input.rows()) {
    throw ShapeError("horizon " + std::to_string(steps) + " exceeds input length " +
                     std::to_string(input.rows()));
  }

  Trajectory traj;
  traj.input = input.topRows(steps);
  traj.spike_fn = spike_fn;
  traj.dt = params.layers.back().cfg.dt;
  std::vector<LayerState> current;
  for (const auto& layer : params.layers) {
    const Eigen::Index n = layer.n_post();
    traj.layers.push_back(LayerTrace{Matrix::Zero(steps, n), Matrix::Zero(steps, n),
                                     Matrix::Zero(steps, n)});
    current.push_back(LayerState::zeros(n));
  }

  for (Eigen::Index step = 0; step + 1 < steps; ++step) {
    // Every layer advances from the step-n snapshot, so layer l consumes
    // layer l-1's spikes from the previous step.
    std::vector<LayerState> next;
    next.reserve(current.size());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      const Vector pre = l == 0 ? Vector(traj.input.row(step).transpose()) : current[l - 1].s;
      next.push_back(step_layer(current[l], pre, params.layers[l], spike_fn));
      if (!all_finite(next.back().i) || !all_finite(next.back().u)) {
        throw NumericError("non-finite state in layer " + std::to_string(l + 1) +
                           " at step " + std::to_string(step + 1));
      }
      LayerTrace& trace = traj.layers[l];
      trace.i.row(step + 1) = next.back().i.transpose();
      trace.u.row(step + 1) = next.back().u.transpose();
      trace.s.row(step + 1) = next.back().s.transpose();
    }
    current = std::move(next);
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "step,layer,neuron,I,U,S\n";
  for (Eigen::Index n = 0; n < trajectory.steps(); ++n) {
    for (std::size_t l = 0; l < trajectory.layers.size(); ++l) {
      const LayerTrace& t = trajectory.layers[l];
      for (Eigen::Index k = 0; k < t.i.cols(); ++k) {
        out << n << ',' << (l + 1) << ',' << k << ',' << format_double(t.i(n, k)) << ','
            << format_double(t.u(n, k)) << ',' << format_double(t.s(n, k)) << '\n';
      }
    }
  }
}

}  // namespace spikegrad
