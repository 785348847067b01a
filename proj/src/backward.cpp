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

#include "spikegrad/backward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spikegrad {

GradientSet GradientSet::zeros_like(const NetworkParams& params) {
  GradientSet g;
  for (const auto& layer : params.layers) {
    g.dw.push_back(Matrix::Zero(layer.w.rows(), layer.w.cols()));
    if (layer.v) {
      g.dv.emplace_back(Matrix::Zero(layer.v->rows(), layer.v->cols()));
    } else {
      g.dv.emplace_back(std::nullopt);
    }
  }
  return g;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  if (other.dw.size() != dw.size()) throw ShapeError("gradient sets differ in depth");
  for (std::size_t l = 0; l < dw.size(); ++l) {
    dw[l] += other.dw[l];
    if (dv[l].has_value() != other.dv[l].has_value()) {
      throw ShapeError("gradient sets differ in recurrent layers");
    }
    if (dv[l]) *dv[l] += *other.dv[l];
  }
  return *this;
}

GradientSet& GradientSet::operator*=(double factor) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    dw[l] *= factor;
    if (dv[l]) *dv[l] *= factor;
  }
  return *this;
}

double GradientSet::squared_norm() const {
  double total = 0.0;
  for (std::size_t l = 0; l < dw.size(); ++l) {
    total += dw[l].squaredNorm();
    if (dv[l]) total += dv[l]->squaredNorm();
  }
  return total;
}

bool GradientSet::all_finite() const {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    if (!dw[l].allFinite()) return false;
    if (dv[l] && !dv[l]->allFinite()) return false;
  }
  return true;
}

bool GradientSet::same_shape(const NetworkParams& params) const {
  if (dw.size() != params.layers.size() || dv.size() != params.layers.size()) return false;
  for (std::size_t l = 0; l < dw.size(); ++l) {
    const auto& layer = params.layers[l];
    if (dw[l].rows() != layer.w.rows() || dw[l].cols() != layer.w.cols()) return false;
    if (dv[l].has_value() != layer.v.has_value()) return false;
    if (dv[l] && (dv[l]->rows() != layer.v->rows() || dv[l]->cols() != layer.v->cols())) {
      return false;
    }
  }
  return true;
}

namespace {

void append_row_major(const Matrix& m, std::vector<double>& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
}

Vector to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

Vector GradientSet::flatten() const {
  std::vector<double> values;
  for (std::size_t l = 0; l < dw.size(); ++l) {
    append_row_major(dw[l], values);
    if (dv[l]) append_row_major(*dv[l], values);
  }
  return to_vector(values);
}

Vector GradientSet::flatten_layer(std::size_t layer) const {
  std::vector<double> values;
  append_row_major(dw[layer], values);
  if (dv[layer]) append_row_major(*dv[layer], values);
  return to_vector(values);
}

double relative_difference(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("relative_difference: size mismatch");
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

double relative_difference(const GradientSet& a, const GradientSet& b) {
  return relative_difference(a.flatten(), b.flatten());
}

double spike_gradient(const SpikeFunction& spike_fn, const SurrogateSpec& surrogate, double u,
                      double threshold) {
  if (spike_fn.soft()) return spike_fn.derivative(u, threshold);
  return surrogate_derivative(surrogate, u, threshold);
}

void check_loss_layer(const NetworkParams& params, const LossSpec& loss) {
  const bool spiking = params.layers.back().cfg.spiking();
  if (loss.kind == LossKind::kMaxVoltageCrossEntropy && spiking) {
    throw ContractError("cross-entropy readout needs a non-spiking output layer");
  }
  if (loss.kind == LossKind::kVanRossum && !spiking) {
    throw ContractError("van Rossum loss needs a spiking output layer");
  }
}

GradientSet reverse_pass(const Trajectory& trajectory, const NetworkParams& params,
                         const OutputGradient& output, const BackwardOptions& options,
                         const SpatialTransport& transport) {
  const std::size_t depth = params.layers.size();
  if (trajectory.layers.size() != depth) throw ShapeError("trajectory depth mismatch");
  const Eigen::Index steps = trajectory.steps();
  const std::size_t top = depth - 1;

  if (transport.kind == SpatialTransport::Kind::kFeedback ||
      transport.kind == SpatialTransport::Kind::kDirect) {
    if (transport.matrices == nullptr || transport.matrices->size() < depth - 1) {
      throw ShapeError("transport matrices missing");
    }
    for (std::size_t l = 0; l + 1 < depth; ++l) {
      const bool direct = transport.kind == SpatialTransport::Kind::kDirect;
      const Matrix& m = (*transport.matrices)[direct ? l : l + 1];
      const Eigen::Index want_cols =
          direct ? params.layers[top].n_post() : params.layers[l + 1].n_post();
      if (m.rows() != params.layers[l].n_post() || m.cols() != want_cols) {
        throw ShapeError("feedback matrix for layer " + std::to_string(l + 1) +
                         " has the wrong shape");
      }
    }
  }

  // Exact transport goes through explicit transposes so that it shares the
  // feedback path's arithmetic and agrees with it bit for bit when G = W^T.
  std::vector<Matrix> w_transposed;
  const std::vector<Matrix>* spatial = transport.matrices;
  if (transport.kind == SpatialTransport::Kind::kExact) {
    w_transposed.resize(depth);
    for (std::size_t l = 1; l < depth; ++l) w_transposed[l] = params.layers[l].w.transpose();
    spatial = &w_transposed;
  }

  GradientSet grad = GradientSet::zeros_like(params);
  // Adjoints of I and U at step n+1, per layer.
  std::vector<Vector> g_i_next(depth), g_u_next(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    g_i_next[l] = Vector::Zero(params.layers[l].n_post());
    g_u_next[l] = Vector::Zero(params.layers[l].n_post());
  }
  std::vector<Vector> g_i(depth), g_u(depth);
  Vector g_s;

  for (Eigen::Index n = steps - 1; n >= 0; --n) {
    for (std::size_t l = 0; l < depth; ++l) {
      const LayerParams& layer = params.layers[l];
      const NeuronConfig& cfg = layer.cfg;
      const LayerTrace& trace = trajectory.layers[l];

      // dL/dS^l[n]
      g_s = Vector::Zero(layer.n_post());
      if (l == top) g_s += output.d_s.row(n).transpose();
      if (layer.v) g_s.noalias() += layer.v->transpose() * g_i_next[l];
      if (l < top) {
        switch (transport.kind) {
          case SpatialTransport::Kind::kExact:
          case SpatialTransport::Kind::kFeedback:
            g_s.noalias() += (*spatial)[l + 1] * g_i_next[l + 1];
            break;
          case SpatialTransport::Kind::kDirect:
            g_s.noalias() += (*spatial)[l] * g_i_next[top];
            break;
          case SpatialTransport::Kind::kNone:
            break;
        }
      }
      if (cfg.spiking() && !options.detach_reset) {
        g_s -= (cfg.threshold - NeuronConfig::kRestPotential) * g_u_next[l];
      }

      g_u[l] = cfg.beta * g_u_next[l];
      if (l == top) g_u[l] += output.d_u.row(n).transpose();
      if (cfg.spiking()) {
        for (Eigen::Index k = 0; k < layer.n_post(); ++k) {
          g_u[l][k] += spike_gradient(trajectory.spike_fn, options.surrogate, trace.u(n, k),
                                      cfg.threshold) *
                       g_s[k];
        }
      }
      g_i[l] = cfg.alpha * g_i_next[l] + g_u_next[l];

      // I^l[n+1] received W pre[n] + V s[n].
      if (n + 1 < steps) {
        grad.dw[l].noalias() +=
            g_i_next[l] * trajectory.presynaptic(l).row(n);
        if (layer.v) grad.dv[l]->noalias() += g_i_next[l] * trace.s.row(n);
      }
    }
    std::swap(g_i, g_i_next);
    std::swap(g_u, g_u_next);
  }

  if (!grad.all_finite()) throw NumericError("non-finite gradient in reverse pass");
  return grad;
}

GradientSet bptt(const Trajectory& trajectory, const NetworkParams& params, const LossSpec& loss,
                 const BackwardOptions& options) {
  check_loss_layer(params, loss);
  const OutputGradient output = output_gradient(trajectory, loss);
  if (!std::isfinite(output.loss)) throw NumericError("non-finite loss");
  return reverse_pass(trajectory, params, output, options);
}

}  // namespace spikegrad
