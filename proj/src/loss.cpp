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

#include "spikegrad/loss.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace spikegrad {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "vanrossum") return LossKind::kVanRossum;
  if (name == "xent") return LossKind::kMaxVoltageCrossEntropy;
  throw ConfigError("unknown loss '" + std::string(name) + "' (expected vanrossum|xent)");
}

std::string_view loss_name(LossKind kind) {
  return kind == LossKind::kVanRossum ? "vanrossum" : "xent";
}

LossSpec LossSpec::van_rossum(SpikeRaster target, double epsilon_tau) {
  LossSpec spec;
  spec.kind = LossKind::kVanRossum;
  spec.target = std::move(target);
  spec.epsilon_tau = epsilon_tau;
  return spec;
}

LossSpec LossSpec::cross_entropy(int label) {
  LossSpec spec;
  spec.kind = LossKind::kMaxVoltageCrossEntropy;
  spec.label = label;
  return spec;
}

double kernel_decay(double dt, double tau) {
  if (!(dt > 0.0) || !(tau > 0.0)) throw ConfigError("kernel time constants must be positive");
  return std::exp(-dt / tau);
}

Matrix exponential_filter(const Matrix& x, double decay) {
  Matrix y(x.rows(), x.cols());
  if (x.rows() == 0) return y;
  y.row(0) = x.row(0);
  for (Eigen::Index n = 1; n < x.rows(); ++n) y.row(n) = decay * y.row(n - 1) + x.row(n);
  return y;
}

double van_rossum_loss(const SpikeRaster& output, const SpikeRaster& target, double decay) {
  if (output.rows() != target.rows() || output.cols() != target.cols()) {
    throw ShapeError("van Rossum loss: output and target shapes differ");
  }
  const Matrix e = exponential_filter(output - target, decay);
  return 0.5 * e.squaredNorm();
}

SoftmaxResult softmax_cross_entropy(const Vector& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    throw ContractError("label " + std::to_string(label) + " out of range for " +
                        std::to_string(logits.size()) + " classes");
  }
  const double m = logits.maxCoeff();
  Vector p = (logits.array() - m).exp();
  const double z = p.sum();
  p /= z;
  SoftmaxResult r;
  r.loss = -(logits[label] - m - std::log(z));
  r.grad = p;
  r.grad[label] -= 1.0;
  return r;
}

ReadoutResult readout_loss(const Trajectory& trajectory, int label) {
  const Matrix& u = trajectory.layers.back().u;
  const Eigen::Index classes = u.cols();
  ReadoutResult r;
  r.max_voltage.resize(classes);
  r.argmax_step.assign(classes, 0);
  for (Eigen::Index c = 0; c < classes; ++c) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < u.rows(); ++n) {
      if (u(n, c) > best) {
        best = u(n, c);
        r.argmax_step[c] = n;
      }
    }
    r.max_voltage[c] = best;
  }
  const SoftmaxResult sm = softmax_cross_entropy(r.max_voltage, label);
  r.loss = sm.loss;
  r.d_u = Matrix::Zero(u.rows(), classes);
  for (Eigen::Index c = 0; c < classes; ++c) r.d_u(r.argmax_step[c], c) = sm.grad[c];
  return r;
}

int readout_prediction(const Trajectory& trajectory) {
  const Matrix& u = trajectory.layers.back().u;
  Eigen::Index best = 0;
  u.colwise().maxCoeff().maxCoeff(&best);
  return static_cast<int>(best);
}

OutputGradient output_gradient(const Trajectory& trajectory, const LossSpec& loss) {
  const LayerTrace& out = trajectory.layers.back();
  OutputGradient g;
  if (loss.kind == LossKind::kVanRossum) {
    if (loss.target.rows() != out.s.rows() || loss.target.cols() != out.s.cols()) {
      throw ShapeError("van Rossum target shape does not match the output layer");
    }
    const double decay = kernel_decay(trajectory.dt, loss.epsilon_tau);
    const Matrix e = exponential_filter(out.s - loss.target, decay);
    g.loss = 0.5 * e.squaredNorm();
    // Adjoint of the causal filter: anti-causal filtering of the error.
    g.d_s = e;
    for (Eigen::Index n = e.rows() - 2; n >= 0; --n) g.d_s.row(n) += decay * g.d_s.row(n + 1);
    g.d_u = Matrix::Zero(out.u.rows(), out.u.cols());
    return g;
  }
  const ReadoutResult r = readout_loss(trajectory, loss.label);
  g.loss = r.loss;
  g.d_u = r.d_u;
  g.d_s = Matrix::Zero(out.s.rows(), out.s.cols());
  return g;
}

double loss_value(const Trajectory& trajectory, const LossSpec& loss) {
  if (loss.kind == LossKind::kVanRossum) {
    return van_rossum_loss(trajectory.layers.back().s, loss.target,
                           kernel_decay(trajectory.dt, loss.epsilon_tau));
  }
  return readout_loss(trajectory, loss.label).loss;
}

}  // namespace spikegrad
