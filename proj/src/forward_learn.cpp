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

#include "spikegrad/forward_learn.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace spikegrad {

namespace {

std::size_t matrix_bytes(const Matrix& m) {
  return static_cast<std::size_t>(m.size()) * sizeof(double);
}

// Scales row k of `m` by gain[k].
void scale_rows(Matrix& m, const Vector& gain) { m = gain.asDiagonal() * m; }

Vector surrogate_gains(const LayerState& state, const NeuronConfig& cfg,
                       const SpikeFunction& spike_fn, const SurrogateSpec& surrogate) {
  Vector gain = Vector::Zero(state.u.size());
  if (!cfg.spiking()) return gain;
  for (Eigen::Index k = 0; k < gain.size(); ++k) {
    gain[k] = spike_gradient(spike_fn, surrogate, state.u[k], cfg.threshold);
  }
  return gain;
}

void check_finite(const LayerState& s, std::size_t layer, Eigen::Index step) {
  if (!s.i.allFinite() || !s.u.allFinite()) {
    throw NumericError("non-finite state in layer " + std::to_string(layer + 1) + " at step " +
                       std::to_string(step));
  }
}

}  // namespace

RtrlState::RtrlState(const NetworkParams& params) {
  const Eigen::Index p = params.parameter_count();
  for (const auto& layer : params.layers) {
    d_i.push_back(Matrix::Zero(layer.n_post(), p));
    d_u.push_back(Matrix::Zero(layer.n_post(), p));
    d_s.push_back(Matrix::Zero(layer.n_post(), p));
  }
  d_loss = Matrix::Zero(params.n_outputs(), p);
}

std::size_t RtrlState::bytes() const {
  std::size_t total = matrix_bytes(d_loss);
  for (std::size_t l = 0; l < d_i.size(); ++l) {
    total += matrix_bytes(d_i[l]) + matrix_bytes(d_u[l]) + matrix_bytes(d_s[l]);
  }
  return total;
}

RtrlResult rtrl(const NetworkParams& params, const SpikeRaster& input, const LossSpec& loss,
                const RtrlOptions& options, const SpikeFunction& spike_fn) {
  params.validate();
  check_loss_layer(params, loss);
  const Eigen::Index neurons = params.total_neurons();
  if (!options.force) {
    if (neurons > kRtrlMaxNeurons) {
      throw ContractError("rtrl: " + std::to_string(neurons) + " neurons exceeds the limit of " +
                          std::to_string(kRtrlMaxNeurons) + " (force to override)");
    }
    if (params.recurrent() && neurons > kRtrlMaxRecurrentNeurons) {
      throw ContractError("rtrl: recurrent networks are limited to " +
                          std::to_string(kRtrlMaxRecurrentNeurons) + " neurons");
    }
  }
  if (input.cols() != params.n_inputs()) throw ShapeError("rtrl: input width mismatch");

  const std::size_t depth = params.layers.size();
  const std::size_t top = depth - 1;
  const Eigen::Index steps = input.rows();
  const Eigen::Index n_params = params.parameter_count();
  const SurrogateSpec& surrogate = options.backward.surrogate;

  std::vector<Eigen::Index> w_offset(depth), v_offset(depth);
  {
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < depth; ++l) {
      w_offset[l] = off;
      off += params.layers[l].w.size();
      v_offset[l] = off;
      if (params.layers[l].v) off += params.layers[l].v->size();
    }
  }

  const bool van_rossum = loss.kind == LossKind::kVanRossum;
  double decay = 0.0;
  if (van_rossum) {
    if (loss.target.rows() != steps || loss.target.cols() != params.n_outputs()) {
      throw ShapeError("rtrl: van Rossum target shape mismatch");
    }
    decay = kernel_decay(params.layers.back().cfg.dt, loss.epsilon_tau);
  }

  RtrlState st(params);
  std::vector<LayerState> state;
  for (const auto& layer : params.layers) state.push_back(LayerState::zeros(layer.n_post()));

  Vector error = Vector::Zero(params.n_outputs());
  Vector best = Vector::Constant(params.n_outputs(), -std::numeric_limits<double>::infinity());
  Vector grad_flat = Vector::Zero(n_params);
  double loss_total = 0.0;

  for (Eigen::Index n = 0; n < steps; ++n) {
    for (std::size_t l = 0; l < depth; ++l) {
      st.d_s[l] = st.d_u[l];
      scale_rows(st.d_s[l], surrogate_gains(state[l], params.layers[l].cfg, spike_fn, surrogate));
    }

    // Contract with the loss derivative at step n.
    const LayerState& out = state[top];
    if (van_rossum) {
      error = decay * error + out.s - loss.target.row(n).transpose();
      st.d_loss = decay * st.d_loss + st.d_s[top];
      grad_flat.noalias() += st.d_loss.transpose() * error;
      loss_total += 0.5 * error.squaredNorm();
    } else {
      for (Eigen::Index c = 0; c < out.u.size(); ++c) {
        if (out.u[c] > best[c]) {
          best[c] = out.u[c];
          st.d_loss.row(c) = st.d_u[top].row(c);
        }
      }
    }

    if (n + 1 == steps) break;

    // Advance states and sensitivities to n+1 from the step-n snapshot.
    std::vector<LayerState> next(depth);
    std::vector<Matrix> next_i(depth), next_u(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      const LayerParams& layer = params.layers[l];
      const NeuronConfig& cfg = layer.cfg;
      const Vector pre = l == 0 ? Vector(input.row(n).transpose()) : state[l - 1].s;
      next[l] = step_layer(state[l], pre, layer, spike_fn);
      check_finite(next[l], l, n + 1);

      next_i[l] = cfg.alpha * st.d_i[l];
      if (l > 0) next_i[l].noalias() += layer.w * st.d_s[l - 1];
      if (layer.v) next_i[l].noalias() += *layer.v * st.d_s[l];
      const Eigen::Index n_pre = layer.n_pre();
      for (Eigen::Index i = 0; i < layer.n_post(); ++i) {
        for (Eigen::Index j = 0; j < n_pre; ++j) {
          next_i[l](i, w_offset[l] + i * n_pre + j) += pre[j];
        }
        if (layer.v) {
          const Eigen::Index n_post = layer.n_post();
          for (Eigen::Index j = 0; j < n_post; ++j) {
            next_i[l](i, v_offset[l] + i * n_post + j) += state[l].s[j];
          }
        }
      }

      next_u[l] = cfg.beta * st.d_u[l] + st.d_i[l];
      if (cfg.spiking() && !options.backward.detach_reset) {
        next_u[l] -= (cfg.threshold - NeuronConfig::kRestPotential) * st.d_s[l];
      }
    }
    state = std::move(next);
    st.d_i = std::move(next_i);
    st.d_u = std::move(next_u);
  }

  if (!van_rossum) {
    const SoftmaxResult sm = softmax_cross_entropy(best, loss.label);
    loss_total = sm.loss;
    grad_flat = st.d_loss.transpose() * sm.grad;
  }

  RtrlResult result;
  result.loss = loss_total;
  result.state_bytes = st.bytes();
  result.grad = GradientSet::zeros_like(params);
  for (std::size_t l = 0; l < depth; ++l) {
    const LayerParams& layer = params.layers[l];
    result.grad.dw[l] = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                       Eigen::RowMajor>>(
        grad_flat.data() + w_offset[l], layer.w.rows(), layer.w.cols());
    if (layer.v) {
      *result.grad.dv[l] = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                          Eigen::RowMajor>>(
          grad_flat.data() + v_offset[l], layer.v->rows(), layer.v->cols());
    }
  }
  if (!result.grad.all_finite() || !std::isfinite(result.loss)) {
    throw NumericError("rtrl: non-finite gradient");
  }
  return result;
}

// ---------------------------------------------------------------------------

EligibilityState EligibilityState::zeros(Eigen::Index n_post, Eigen::Index n_pre) {
  return EligibilityState{Matrix::Zero(n_post, n_pre), Matrix::Zero(n_post, n_pre),
                          Matrix::Zero(n_post, n_pre), Vector::Zero(n_post)};
}

std::size_t EligibilityState::bytes() const {
  return matrix_bytes(d_i) + matrix_bytes(d_u) + matrix_bytes(filtered) +
         static_cast<std::size_t>(error.size()) * sizeof(double);
}

Matrix superspike_step(EligibilityState& state, const LayerState& layer_now,
                       const Vector& pre_spikes_prev, const Vector& target_now,
                       const LayerParams& params, const SurrogateSpec& surrogate,
                       double kernel_decay) {
  const Eigen::Index n_post = params.n_post();
  const Eigen::Index n_pre = params.n_pre();
  if (state.d_i.rows() != n_post || state.d_i.cols() != n_pre ||
      pre_spikes_prev.size() != n_pre || target_now.size() != n_post ||
      layer_now.u.size() != n_post) {
    throw ShapeError("superspike_step: shape mismatch");
  }
  const NeuronConfig& cfg = params.cfg;

  // Membrane trace first: it consumes the current trace from step n-1.
  state.d_u = cfg.beta * state.d_u + state.d_i;
  state.d_i = cfg.alpha * state.d_i;
  state.d_i.rowwise() += pre_spikes_prev.transpose();

  Vector gain(n_post);
  for (Eigen::Index i = 0; i < n_post; ++i) {
    gain[i] = surrogate_derivative(surrogate, layer_now.u[i], cfg.threshold);
  }
  state.filtered = kernel_decay * state.filtered + gain.asDiagonal() * state.d_u;
  state.error = kernel_decay * state.error + layer_now.s - target_now;

  Matrix increment = state.error.asDiagonal() * state.filtered;
  if (!increment.allFinite()) throw NumericError("superspike_step: non-finite increment");
  return increment;
}

HiddenEligibilityState HiddenEligibilityState::zeros(Eigen::Index n_hidden, Eigen::Index n_in,
                                                     Eigen::Index n_out) {
  HiddenEligibilityState s;
  s.d_i = Matrix::Zero(n_hidden, n_in);
  s.d_u = Matrix::Zero(n_hidden, n_in);
  s.d_s = Matrix::Zero(n_hidden, n_in);
  s.out_current = Matrix::Zero(n_hidden, n_in);
  s.out_membrane = Matrix::Zero(n_hidden, n_in);
  s.filtered.assign(n_out, Matrix::Zero(n_hidden, n_in));
  return s;
}

std::size_t HiddenEligibilityState::bytes() const {
  std::size_t total = matrix_bytes(d_i) + matrix_bytes(d_u) + matrix_bytes(d_s) +
                      matrix_bytes(out_current) + matrix_bytes(out_membrane);
  for (const auto& f : filtered) total += matrix_bytes(f);
  return total;
}

Matrix superspike_hidden_update(HiddenEligibilityState& state, const LayerState& hidden_now,
                                const Vector& input_prev, const LayerState& output_now,
                                const LayerParams& hidden, const LayerParams& output,
                                const Matrix& feedback, const Vector& output_error,
                                const SurrogateSpec& surrogate, double kernel_decay) {
  const Eigen::Index n_hidden = hidden.n_post();
  const Eigen::Index n_in = hidden.n_pre();
  const Eigen::Index n_out = output.n_post();
  if (output.n_pre() != n_hidden || feedback.rows() != n_hidden || feedback.cols() != n_out ||
      output_error.size() != n_out || input_prev.size() != n_in ||
      hidden_now.u.size() != n_hidden || output_now.u.size() != n_out ||
      state.d_i.rows() != n_hidden || state.d_i.cols() != n_in ||
      static_cast<Eigen::Index>(state.filtered.size()) != n_out) {
    throw ShapeError("superspike_hidden_update: shape mismatch");
  }

  // Hidden neuron's own traces (reset dropped).
  state.d_u = hidden.cfg.beta * state.d_u + state.d_i;
  state.d_i = hidden.cfg.alpha * state.d_i;
  state.d_i.rowwise() += input_prev.transpose();

  // Carry last step's hidden spike sensitivity through the output filters.
  state.out_membrane = output.cfg.beta * state.out_membrane + state.out_current;
  state.out_current = output.cfg.alpha * state.out_current + state.d_s;

  Vector hidden_gain(n_hidden);
  for (Eigen::Index i = 0; i < n_hidden; ++i) {
    hidden_gain[i] = surrogate_derivative(surrogate, hidden_now.u[i], hidden.cfg.threshold);
  }
  state.d_s = hidden_gain.asDiagonal() * state.d_u;

  Matrix increment = Matrix::Zero(n_hidden, n_in);
  for (Eigen::Index k = 0; k < n_out; ++k) {
    const double out_gain =
        surrogate_derivative(surrogate, output_now.u[k], output.cfg.threshold);
    state.filtered[k] = kernel_decay * state.filtered[k] + out_gain * state.out_membrane;
    if (output_error[k] != 0.0) {
      increment.noalias() +=
          (output_error[k] * feedback.col(k)).asDiagonal() * state.filtered[k];
    }
  }
  if (!increment.allFinite()) throw NumericError("superspike_hidden_update: non-finite increment");
  return increment;
}

SuperSpikeResult superspike(NetworkParams& params, const Matrix* feedback,
                            const SpikeRaster& input, const SpikeRaster& target,
                            const SuperSpikeOptions& options) {
  params.validate();
  const std::size_t depth = params.layers.size();
  if (depth != 1 && depth != 2) {
    throw ContractError("superspike: needs a one- or two-layer feed-forward network");
  }
  for (const auto& layer : params.layers) {
    if (layer.v) throw ContractError("superspike: recurrent weights are not supported");
    if (!layer.cfg.spiking()) throw ContractError("superspike: all layers must spike");
  }
  if (depth == 2 && feedback == nullptr) {
    throw ContractError("superspike: two-layer networks need a feedback matrix");
  }
  if (input.cols() != params.n_inputs()) throw ShapeError("superspike: input width mismatch");
  const Eigen::Index steps = input.rows();
  if (target.rows() != steps || target.cols() != params.n_outputs()) {
    throw ShapeError("superspike: target shape mismatch");
  }

  const std::size_t top = depth - 1;
  LayerParams& out_layer = params.layers[top];
  const double decay = kernel_decay(out_layer.cfg.dt, options.epsilon_tau);
  const bool online = options.online_learning_rate > 0.0;

  SuperSpikeResult result;
  result.grad = GradientSet::zeros_like(params);
  Trajectory& traj = result.trajectory;
  traj.input = input;
  traj.dt = out_layer.cfg.dt;
  for (const auto& layer : params.layers) {
    const Eigen::Index n = layer.n_post();
    traj.layers.push_back(
        LayerTrace{Matrix::Zero(steps, n), Matrix::Zero(steps, n), Matrix::Zero(steps, n)});
  }

  EligibilityState out_trace = EligibilityState::zeros(out_layer.n_post(), out_layer.n_pre());
  HiddenEligibilityState hidden_trace;
  if (depth == 2) {
    hidden_trace = HiddenEligibilityState::zeros(params.layers[0].n_post(),
                                                 params.layers[0].n_pre(), out_layer.n_post());
  }

  std::vector<LayerState> state;
  std::vector<Vector> pre_prev;
  for (const auto& layer : params.layers) {
    state.push_back(LayerState::zeros(layer.n_post()));
    pre_prev.push_back(Vector::Zero(layer.n_pre()));
  }

  for (Eigen::Index n = 0; n < steps; ++n) {
    if (n > 0) {
      std::vector<LayerState> next(depth);
      for (std::size_t l = 0; l < depth; ++l) {
        const Vector pre = l == 0 ? Vector(input.row(n - 1).transpose()) : state[l - 1].s;
        next[l] = step_layer(state[l], pre, params.layers[l]);
        check_finite(next[l], l, n);
        pre_prev[l] = pre;
      }
      state = std::move(next);
    }
    for (std::size_t l = 0; l < depth; ++l) {
      traj.layers[l].i.row(n) = state[l].i.transpose();
      traj.layers[l].u.row(n) = state[l].u.transpose();
      traj.layers[l].s.row(n) = state[l].s.transpose();
    }

    const Matrix out_inc = superspike_step(out_trace, state[top], pre_prev[top],
                                           target.row(n).transpose(), out_layer,
                                           options.surrogate, decay);
    result.loss += 0.5 * out_trace.error.squaredNorm();
    Matrix hidden_inc;
    if (depth == 2) {
      hidden_inc = superspike_hidden_update(hidden_trace, state[0], pre_prev[0], state[top],
                                            params.layers[0], out_layer, *feedback,
                                            out_trace.error, options.surrogate, decay);
    }

    result.grad.dw[top] += out_inc;
    if (depth == 2) result.grad.dw[0] += hidden_inc;
    if (online) {
      out_layer.w -= options.online_learning_rate * out_inc;
      if (depth == 2) params.layers[0].w -= options.online_learning_rate * hidden_inc;
    }
  }

  result.state_bytes = out_trace.bytes() + (depth == 2 ? hidden_trace.bytes() : 0);
  return result;
}

}  // namespace spikegrad
