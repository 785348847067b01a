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

#include "spikegrad/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <ostream>
#include <thread>

#include "spikegrad/forward_learn.hpp"
#include "spikegrad/tasks.hpp"

namespace spikegrad {

int worker_count() {
  if (const char* env = std::getenv("SPIKEGRAD_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 1024L));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "epoch,split,loss,accuracy,wall_ms\n";
  for (const MetricsRow& r : rows) {
    out << r.epoch << ',' << r.split << ',' << format_double(r.loss) << ','
        << format_double(r.accuracy) << ',' << format_double(r.wall_ms) << '\n';
  }
}

Dataset build_dataset(const ExperimentConfig& config) {
  Dataset data;
  const LossKind kind = config.loss_kind();
  if (config.task == TaskKind::kSpikeTarget) {
    const SpikeTargetTask task =
        gen_spike_target_task(config.inputs, config.classes, config.steps, config.dt,
                              config.input_rate, config.target_spikes,
                              config.effective_data_seed());
    data.train.push_back(Sample{task.input, LossSpec::van_rossum(task.target, config.epsilon_tau)});
    return data;
  }
  if (config.task != TaskKind::kPattern) throw ConfigError("task has no raster dataset");
  const PatternDataset patterns = gen_pattern_task(config.pattern_spec(), config.effective_data_seed());
  auto convert = [&](const std::vector<LabeledRaster>& set, std::vector<Sample>& out) {
    for (const LabeledRaster& item : set) {
      if (kind == LossKind::kVanRossum) {
        out.push_back(Sample{item.input,
                             LossSpec::van_rossum(class_target_raster(item.label, config.classes,
                                                                      config.steps,
                                                                      config.target_period),
                                                  config.epsilon_tau)});
      } else {
        LossSpec spec = LossSpec::cross_entropy(item.label);
        spec.epsilon_tau = config.epsilon_tau;
        out.push_back(Sample{item.input, std::move(spec)});
      }
    }
  };
  convert(patterns.train, data.train);
  convert(patterns.test, data.test);
  return data;
}

FeedbackMatrices build_feedback(const ExperimentConfig& config, const NetworkParams& params) {
  const std::uint64_t seed = config.effective_feedback_seed();
  switch (config.method) {
    case Method::kFa:
    case Method::kDfa:
    case Method::kSuperSpike:
      return FeedbackMatrices::for_alignment(params, seed);
    case Method::kLocal:
      return FeedbackMatrices::for_local_errors(params, params.n_outputs(), seed);
    default: {
      FeedbackMatrices none;
      none.seed = seed;
      return none;
    }
  }
}

namespace {

BackwardOptions backward_options(const ExperimentConfig& config) {
  return BackwardOptions{config.surrogate_spec(), config.detach_reset};
}

Matrix local_pseudo_target(const Sample& sample, Eigen::Index steps, Eigen::Index n_out) {
  if (sample.loss.kind == LossKind::kVanRossum) return sample.loss.target;
  Matrix target = Matrix::Zero(steps, n_out);
  target.col(sample.loss.label).setOnes();
  return target;
}

int label_of(const Sample& sample) {
  return sample.loss.kind == LossKind::kVanRossum ? spike_count_prediction(sample.loss.target)
                                                  : sample.loss.label;
}

}  // namespace

SampleGradient sample_gradient(const ExperimentConfig& config, const NetworkParams& params,
                               const FeedbackMatrices& feedback, const Sample& sample,
                               bool with_reference) {
  const BackwardOptions options = backward_options(config);
  const SpikeFunction spike_fn = config.spike_function();
  SampleGradient out;

  if (config.method == Method::kRtrl) {
    RtrlResult r = rtrl(params, sample.input, sample.loss, RtrlOptions{options, config.rtrl_force},
                        spike_fn);
    out.grad = std::move(r.grad);
    out.loss = r.loss;
    return out;
  }
  if (config.method == Method::kSuperSpike) {
    NetworkParams copy = params;
    const Matrix* b = feedback.h.empty() ? nullptr : &feedback.h[0];
    SuperSpikeOptions ss{options.surrogate, config.epsilon_tau, 0.0};
    SuperSpikeResult r = superspike(copy, b, sample.input, sample.loss.target, ss);
    out.grad = std::move(r.grad);
    out.loss = r.loss;
    return out;
  }

  check_loss_layer(params, sample.loss);
  const Trajectory traj = run_network(params, sample.input, -1, spike_fn);
  const OutputGradient output = output_gradient(traj, sample.loss);
  out.loss = output.loss;
  const bool wants_reference =
      with_reference &&
      (config.method == Method::kFa || config.method == Method::kDfa ||
       config.method == Method::kLocal);
  if (wants_reference) out.reference = reverse_pass(traj, params, output, options);

  switch (config.method) {
    case Method::kBptt:
      out.grad = reverse_pass(traj, params, output, options);
      break;
    case Method::kFa:
      out.grad = reverse_pass(traj, params, output, options,
                              SpatialTransport{SpatialTransport::Kind::kFeedback, &feedback.g});
      break;
    case Method::kDfa:
      out.grad = reverse_pass(traj, params, output, options,
                              SpatialTransport{SpatialTransport::Kind::kDirect, &feedback.h});
      break;
    case Method::kLocal: {
      // The top layer learns from the loss directly; every hidden layer from
      // its own random projection of the target.
      out.grad = reverse_pass(traj, params, output, options,
                              SpatialTransport{SpatialTransport::Kind::kNone, nullptr});
      const Matrix target = local_pseudo_target(sample, traj.steps(), params.n_outputs());
      LocalErrorOptions local{options.surrogate, config.local_decay, config.local_loss_kind()};
      for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
        const LayerTrajectoryView view{traj.presynaptic(l), traj.layers[l], params.layers[l].cfg};
        out.grad.dw[l] = local_error_update(view, feedback.g[l], target, local).dw;
        if (out.grad.dv[l]) out.grad.dv[l]->setZero();
      }
      break;
    }
    default:
      throw ConfigError("method '" + std::string(method_name(config.method)) +
                        "' cannot train a raster task");
  }
  return out;
}

Evaluation evaluate(const ExperimentConfig& config, const NetworkParams& params,
                    const std::vector<Sample>& samples, int workers) {
  Evaluation eval;
  if (samples.empty()) return eval;
  std::vector<double> losses(samples.size());
  std::vector<double> scores(samples.size());
  const SpikeFunction spike_fn = config.spike_function();
  parallel_for(samples.size(), workers, [&](std::size_t k) {
    const Sample& s = samples[k];
    const Trajectory traj = run_network(params, s.input, -1, spike_fn);
    losses[k] = loss_value(traj, s.loss);
    if (config.task == TaskKind::kSpikeTarget) {
      // Fraction of output neurons emitting the target number of spikes.
      const Vector got = traj.layers.back().s.colwise().sum().transpose();
      const Vector want = s.loss.target.colwise().sum().transpose();
      scores[k] = static_cast<double>((got.array() == want.array()).count()) /
                  static_cast<double>(got.size());
    } else if (s.loss.kind == LossKind::kVanRossum) {
      scores[k] = spike_count_prediction(traj.layers.back().s) == label_of(s) ? 1.0 : 0.0;
    } else {
      scores[k] = readout_prediction(traj) == s.loss.label ? 1.0 : 0.0;
    }
  });
  for (std::size_t k = 0; k < samples.size(); ++k) {
    eval.loss += losses[k];
    eval.accuracy += scores[k];
  }
  eval.loss /= static_cast<double>(samples.size());
  eval.accuracy /= static_cast<double>(samples.size());
  return eval;
}

double angle_degrees(const Matrix& a, const Matrix& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double c = std::clamp(a.cwiseProduct(b).sum() / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

namespace {

using Clock = std::chrono::steady_clock;

void apply_update(NetworkParams& params, const GradientSet& grad, double lr) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    params.layers[l].w -= lr * grad.dw[l];
    if (params.layers[l].v && grad.dv[l]) *params.layers[l].v -= lr * *grad.dv[l];
  }
}

bool params_finite(const NetworkParams& params) {
  for (const LayerParams& layer : params.layers) {
    if (!layer.w.allFinite()) return false;
    if (layer.v && !layer.v->allFinite()) return false;
  }
  return true;
}

TrainResult train_xor_task(const ExperimentConfig& config, const TrainOptions& options) {
  const auto start = Clock::now();
  XorTrainOptions xo;
  xo.learning_rate = config.learning_rate;
  xo.max_iterations = config.epochs;
  xo.seed = config.seed;
  xo.n_hidden = config.xor_hidden;
  TrainResult result;
  XorTrainResult xr = train_xor(xo);
  const double elapsed =
      options.record_wall_time
          ? std::chrono::duration<double, std::milli>(Clock::now() - start).count()
          : 0.0;
  for (const XorIteration& it : xr.history) {
    result.metrics.push_back(
        MetricsRow{it.iteration, "train", it.loss, it.correct / 4.0, elapsed});
  }
  NeuronConfig cfg = config.neuron_config();
  cfg.threshold = xr.net.threshold;
  result.params.layers.push_back(LayerParams{xr.net.w_hidden, std::nullopt, cfg});
  result.params.layers.push_back(LayerParams{xr.net.w_out, std::nullopt, cfg});
  result.feedback.seed = config.effective_feedback_seed();
  result.checkpoint = Checkpoint::from_network(result.params, result.feedback, config.hash());
  result.xor_result = std::move(xr);
  return result;
}

}  // namespace

TrainResult train(const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  if (config.task == TaskKind::kXor) return train_xor_task(config, options);

  const auto start = Clock::now();
  const int workers = options.workers > 0 ? options.workers : worker_count();
  auto wall = [&] {
    return options.record_wall_time
               ? std::chrono::duration<double, std::milli>(Clock::now() - start).count()
               : 0.0;
  };

  Rng weight_rng(config.seed);
  NetworkParams params = build_network(config, weight_rng);
  const FeedbackMatrices feedback = build_feedback(config, params);
  const Dataset data = build_dataset(config);
  Rng order_rng(config.effective_data_seed() ^ 0x5851F42D4C957F2DULL);

  TrainResult result;
  result.feedback = feedback;
  const bool track_alignment = config.method == Method::kFa || config.method == Method::kDfa ||
                               config.method == Method::kLocal;

  auto record = [&](int epoch) {
    // Both splits are evaluated before either row is kept.
    const Evaluation train_eval = evaluate(config, params, data.train, workers);
    const Evaluation test_eval = evaluate(config, params, data.test, workers);
    if (!std::isfinite(train_eval.loss) || !std::isfinite(test_eval.loss)) {
      throw NumericError("non-finite loss");
    }
    result.metrics.push_back(
        MetricsRow{epoch, "train", train_eval.loss, train_eval.accuracy, wall()});
    if (!data.test.empty()) {
      result.metrics.push_back(
          MetricsRow{epoch, "test", test_eval.loss, test_eval.accuracy, wall()});
    }
  };

  NetworkParams last_good = params;
  try {
    record(0);
    std::vector<std::size_t> order(data.train.size());
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      for (std::size_t k = order.size(); k > 1; --k) {
        std::swap(order[k - 1], order[static_cast<std::size_t>(order_rng.below(k))]);
      }
      Matrix method_hidden;
      Matrix exact_hidden;
      if (track_alignment && params.layers.size() > 1) {
        method_hidden = Matrix::Zero(params.layers[0].w.rows(), params.layers[0].w.cols());
        exact_hidden = method_hidden;
      }

      if (config.online) {
        const Matrix* b = feedback.h.empty() ? nullptr : &feedback.h[0];
        SuperSpikeOptions ss{config.surrogate_spec(), config.epsilon_tau, config.learning_rate};
        for (std::size_t k : order) {
          const SuperSpikeResult r =
              superspike(params, b, data.train[k].input, data.train[k].loss.target, ss);
          if (!std::isfinite(r.loss) || !params_finite(params)) {
            throw NumericError("online update produced non-finite values");
          }
        }
      } else {
        const auto batch = static_cast<std::size_t>(config.batch_size);
        for (std::size_t first = 0; first < order.size(); first += batch) {
          const std::size_t count = std::min(batch, order.size() - first);
          std::vector<SampleGradient> grads(count);
          parallel_for(count, workers, [&](std::size_t k) {
            grads[k] = sample_gradient(config, params, feedback, data.train[order[first + k]],
                                       track_alignment);
          });
          GradientSet total = GradientSet::zeros_like(params);
          for (const SampleGradient& g : grads) {
            if (!std::isfinite(g.loss)) throw NumericError("non-finite loss");
            total += g.grad;
            if (method_hidden.size() > 0) {
              method_hidden += g.grad.dw[0];
              exact_hidden += g.reference->dw[0];
            }
          }
          if (!total.all_finite()) throw NumericError("non-finite gradient");
          if (config.clip_norm > 0.0) {
            const double norm = std::sqrt(total.squared_norm());
            if (norm > config.clip_norm) total *= config.clip_norm / norm;
          }
          apply_update(params, total, config.learning_rate);
          if (!params_finite(params)) throw NumericError("non-finite weights after update");
        }
      }
      if (track_alignment) {
        result.alignment_degrees.push_back(method_hidden.size() > 0
                                               ? angle_degrees(method_hidden, exact_hidden)
                                               : std::numeric_limits<double>::quiet_NaN());
      }
      record(epoch);
      last_good = params;
    }
  } catch (const NumericError& e) {
    result.diverged = true;
    result.divergence_message = e.what();
  }
  result.params = last_good;
  result.checkpoint = Checkpoint::from_network(last_good, feedback, config.hash());
  return result;
}

}  // namespace spikegrad
