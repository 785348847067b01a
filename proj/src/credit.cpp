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

#include "spikegrad/credit.hpp"

#include <cmath>
#include <string>

namespace spikegrad {

Matrix random_feedback(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

FeedbackMatrices FeedbackMatrices::for_alignment(const NetworkParams& params,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  FeedbackMatrices fb;
  fb.seed = seed;
  const std::size_t depth = params.layers.size();
  const Eigen::Index n_top = params.n_outputs();
  fb.g.push_back(Matrix());
  for (std::size_t l = 1; l < depth; ++l) {
    fb.g.push_back(random_feedback(params.layers[l - 1].n_post(), params.layers[l].n_post(), rng));
  }
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    fb.h.push_back(random_feedback(params.layers[l].n_post(), n_top, rng));
  }
  return fb;
}

FeedbackMatrices FeedbackMatrices::for_local_errors(const NetworkParams& params,
                                                    Eigen::Index target_dim,
                                                    std::uint64_t seed) {
  Rng rng(seed);
  FeedbackMatrices fb;
  fb.seed = seed;
  const std::size_t depth = params.layers.size();
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    fb.g.push_back(random_feedback(target_dim, params.layers[l].n_post(), rng));
  }
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    fb.h.push_back(random_feedback(params.layers[l].n_post(), params.n_outputs(), rng));
  }
  return fb;
}

bool FeedbackMatrices::operator==(const FeedbackMatrices& other) const {
  auto same = [](const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
      if (a[i].size() > 0 && a[i] != b[i]) return false;
    }
    return true;
  };
  return seed == other.seed && same(g, other.g) && same(h, other.h);
}

GradientSet fa_backward(const Trajectory& trajectory, const NetworkParams& params,
                        const FeedbackMatrices& feedback, const LossSpec& loss,
                        const BackwardOptions& options) {
  check_loss_layer(params, loss);
  const OutputGradient output = output_gradient(trajectory, loss);
  SpatialTransport transport{SpatialTransport::Kind::kFeedback, &feedback.g};
  return reverse_pass(trajectory, params, output, options, transport);
}

GradientSet dfa_backward(const Trajectory& trajectory, const NetworkParams& params,
                         const FeedbackMatrices& feedback, const LossSpec& loss,
                         const BackwardOptions& options) {
  check_loss_layer(params, loss);
  const OutputGradient output = output_gradient(trajectory, loss);
  SpatialTransport transport{SpatialTransport::Kind::kDirect, &feedback.h};
  return reverse_pass(trajectory, params, output, options, transport);
}

LocalLossKind parse_local_loss_kind(std::string_view name) {
  if (name == "squared") return LocalLossKind::kSquared;
  if (name == "xent") return LocalLossKind::kCrossEntropy;
  throw ConfigError("unknown local loss '" + std::string(name) + "' (expected squared|xent)");
}

LocalErrorState LocalErrorState::zeros(Eigen::Index n_post, Eigen::Index n_pre) {
  return LocalErrorState{Vector::Zero(n_pre), Vector::Zero(n_pre), Vector::Zero(n_post)};
}

std::size_t LocalErrorState::bytes() const {
  return static_cast<std::size_t>(pre_current.size() + pre_membrane.size() + rate.size()) *
         sizeof(double);
}

LocalErrorResult local_error_update(const LayerTrajectoryView& layer, const Matrix& g_local,
                                    const Matrix& pseudo_target,
                                    const LocalErrorOptions& options) {
  const LayerTrace& trace = layer.trace;
  const Eigen::Index steps = trace.u.rows();
  const Eigen::Index n_post = trace.u.cols();
  const Eigen::Index n_pre = layer.pre_spikes.cols();
  if (g_local.cols() != n_post) throw ShapeError("local error: projection width mismatch");
  if (pseudo_target.cols() != g_local.rows()) {
    throw ShapeError("local error: pseudo-target dimension must equal projection rows");
  }
  if (pseudo_target.rows() != steps || layer.pre_spikes.rows() != steps) {
    throw ShapeError("local error: time axis mismatch");
  }
  const NeuronConfig& cfg = layer.cfg;

  LocalErrorState st = LocalErrorState::zeros(n_post, n_pre);
  LocalErrorResult result;
  result.dw = Matrix::Zero(n_post, n_pre);
  Vector delta(n_post);

  for (Eigen::Index n = 0; n < steps; ++n) {
    if (n > 0) {
      st.pre_membrane = cfg.beta * st.pre_membrane + st.pre_current;
      st.pre_current = cfg.alpha * st.pre_current + layer.pre_spikes.row(n - 1).transpose();
    }
    st.rate = options.kernel_decay * st.rate + trace.s.row(n).transpose();

    const Vector projected = g_local * st.rate;
    const Vector target = pseudo_target.row(n).transpose();
    Vector d_projected;
    if (options.loss == LocalLossKind::kSquared) {
      d_projected = projected - target;
      result.loss += 0.5 * d_projected.squaredNorm();
    } else {
      const double m = projected.maxCoeff();
      Vector p = (projected.array() - m).exp();
      const double z = p.sum();
      p /= z;
      result.loss -= target.dot((projected.array() - m - std::log(z)).matrix());
      d_projected = p * target.sum() - target;
    }
    const Vector d_rate = g_local.transpose() * d_projected;
    for (Eigen::Index i = 0; i < n_post; ++i) {
      delta[i] = surrogate_derivative(options.surrogate, trace.u(n, i), cfg.threshold) * d_rate[i];
    }
    result.dw.noalias() += delta * st.pre_membrane.transpose();
  }
  result.state_bytes = st.bytes();
  if (!result.dw.allFinite()) throw NumericError("local error: non-finite update");
  return result;
}

}  // namespace spikegrad
