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

#include "spikegrad/spiketime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace spikegrad {

namespace {

struct CrossingTerms {
  double ref = 0.0;         // time origin for the exponentials
  double weight_sum = 0.0;  // sum_C W_j
  double x_out = 0.0;       // exp(t_out - ref)
};

// Shared by fire_time and fire_time_gradient so both see the same causal set.
FireResult solve(std::span<const double> weights, std::span<const double> input_times,
                 double threshold, CrossingTerms* terms) {
  if (weights.size() != input_times.size()) {
    throw ShapeError("fire_time: weights and input times differ in length");
  }
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < input_times.size(); ++j) {
    if (std::isfinite(input_times[j])) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return input_times[a] < input_times[b];
  });

  FireResult result;
  if (order.empty()) return result;
  const double ref = input_times[order.front()];
  double a = 0.0;  // sum W
  double b = 0.0;  // sum W exp(t_j - ref)
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t j = order[k];
    a += weights[j];
    b += weights[j] * std::exp(input_times[j] - ref);
    const double denom = a - threshold;
    if (denom == 0.0) continue;
    const double x = b / denom;
    if (!(x > 0.0)) continue;
    const double t = ref + std::log(x);
    const bool after_last = t >= input_times[j];
    const bool before_next = k + 1 == order.size() || t < input_times[order[k + 1]];
    if (after_last && before_next) {
      result.time = t;
      result.causal.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k) + 1);
      if (terms != nullptr) *terms = CrossingTerms{ref, a, x};
      return result;
    }
  }
  return result;
}

}  // namespace

FireResult fire_time(std::span<const double> weights, std::span<const double> input_times,
                     double threshold) {
  return solve(weights, input_times, threshold, nullptr);
}

FireGradient fire_time_gradient(std::span<const double> weights,
                                std::span<const double> input_times, double threshold) {
  CrossingTerms terms;
  const FireResult fired = solve(weights, input_times, threshold, &terms);
  if (!fired.time) throw ContractError("fire_time_gradient: neuron is quiescent");
  const auto n = static_cast<Eigen::Index>(weights.size());
  FireGradient g{Vector::Zero(n), Vector::Zero(n)};
  const double denom = terms.weight_sum - threshold;
  for (std::size_t j : fired.causal) {
    const double x_j = std::exp(input_times[j] - terms.ref);
    g.d_weights[static_cast<Eigen::Index>(j)] = (x_j - terms.x_out) / (denom * terms.x_out);
    g.d_times[static_cast<Eigen::Index>(j)] = weights[j] * x_j / (denom * terms.x_out);
  }
  return g;
}

double membrane_potential(std::span<const double> weights, std::span<const double> input_times,
                          double t) {
  double u = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (std::isfinite(input_times[j]) && input_times[j] <= t) {
      u += weights[j] * (1.0 - std::exp(-(t - input_times[j])));
    }
  }
  return u;
}

EventNet EventNet::random(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out,
                          Rng& rng) {
  EventNet net;
  net.w_hidden.resize(n_hidden, n_in);
  net.w_out.resize(n_out, n_hidden);
  // Hidden weights lean positive so that most hidden neurons fire at first.
  for (Eigen::Index i = 0; i < net.w_hidden.size(); ++i) {
    net.w_hidden.data()[i] = rng.uniform(-1.0, 3.0) * net.threshold;
  }
  for (Eigen::Index i = 0; i < net.w_out.size(); ++i) {
    net.w_out.data()[i] = rng.uniform(-1.0, 1.0) * net.threshold;
  }
  return net;
}

namespace {

std::span<const double> row_span(const Matrix& m, Eigen::Index row, std::vector<double>& buf) {
  buf.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) buf[static_cast<std::size_t>(c)] = m(row, c);
  return buf;
}

std::span<const double> vec_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

EventForward simulate(const EventNet& net, const Vector& input_times) {
  if (input_times.size() != net.w_hidden.cols()) throw ShapeError("simulate: input width");
  EventForward fwd;
  fwd.hidden_times = Vector::Constant(net.w_hidden.rows(), kNoSpike);
  fwd.output_times = Vector::Constant(net.w_out.rows(), kNoSpike);
  std::vector<double> buf;
  for (Eigen::Index h = 0; h < net.w_hidden.rows(); ++h) {
    const FireResult r = fire_time(row_span(net.w_hidden, h, buf), vec_span(input_times),
                                   net.threshold);
    if (r.time) fwd.hidden_times[h] = *r.time;
  }
  for (Eigen::Index o = 0; o < net.w_out.rows(); ++o) {
    const FireResult r = fire_time(row_span(net.w_out, o, buf), vec_span(fwd.hidden_times),
                                   net.threshold);
    if (r.time) fwd.output_times[o] = *r.time;
  }
  return fwd;
}

std::vector<XorTrial> xor_task() {
  std::vector<XorTrial> trials;
  for (double a : {kEarlySpike, kLateSpike}) {
    for (double b : {kEarlySpike, kLateSpike}) {
      Vector t(2);
      t << a, b;
      trials.push_back(XorTrial{t, a == b ? 0 : 1});
    }
  }
  return trials;
}

FirstSpikeLoss first_to_spike_loss(const Vector& output_times, int label) {
  if (label < 0 || label >= output_times.size()) throw ContractError("label out of range");
  const Vector logits = -output_times;
  const double m = logits.maxCoeff();
  Vector p = (logits.array() - m).exp();
  const double z = p.sum();
  p /= z;
  FirstSpikeLoss r;
  r.loss = -(logits[label] - m - std::log(z));
  // dL/dlogit = p - onehot, and dlogit/dt = -1.
  r.d_times = -p;
  r.d_times[label] += 1.0;
  return r;
}

int first_to_spike_prediction(const Vector& output_times) {
  Eigen::Index best = 0;
  const double t = output_times.minCoeff(&best);
  if (!std::isfinite(t)) return -1;
  for (Eigen::Index k = 0; k < output_times.size(); ++k) {
    if (k != best && output_times[k] == t) return -1;
  }
  return static_cast<int>(best);
}

EventGradient event_loss_gradient(const EventNet& net, const XorTrial& trial,
                                  const QuiescencePolicy& policy) {
  const EventForward fwd = simulate(net, trial.input_times);
  EventGradient g;
  g.d_hidden = Matrix::Zero(net.w_hidden.rows(), net.w_hidden.cols());
  g.d_out = Matrix::Zero(net.w_out.rows(), net.w_out.cols());

  const double virtual_time = trial.input_times.maxCoeff() + policy.virtual_delay;
  Vector out_times = fwd.output_times;
  for (Eigen::Index o = 0; o < out_times.size(); ++o) {
    if (!std::isfinite(out_times[o])) out_times[o] = virtual_time;
  }
  const FirstSpikeLoss ce = first_to_spike_loss(out_times, trial.label);
  g.loss = ce.loss;
  g.correct = first_to_spike_prediction(fwd.output_times) == trial.label;

  std::vector<double> buf;
  Vector d_hidden_times = Vector::Zero(net.w_hidden.rows());

  // Silent neurons get a penalty on the weights of inputs that did arrive.
  auto penalise = [&](const Matrix& w, Eigen::Index row, const Vector& in_times, Matrix& dw) {
    double arrived = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (std::isfinite(in_times[j])) arrived += w(row, j);
    }
    const double gap = net.threshold + policy.margin - arrived;
    if (gap <= 0.0) return;
    g.loss += policy.penalty * gap;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (std::isfinite(in_times[j])) dw(row, j) -= policy.penalty;
    }
  };

  for (Eigen::Index o = 0; o < net.w_out.rows(); ++o) {
    if (!std::isfinite(fwd.output_times[o])) {
      penalise(net.w_out, o, fwd.hidden_times, g.d_out);
      continue;
    }
    const FireGradient fg =
        fire_time_gradient(row_span(net.w_out, o, buf), vec_span(fwd.hidden_times), net.threshold);
    g.d_out.row(o) += ce.d_times[o] * fg.d_weights.transpose();
    d_hidden_times += ce.d_times[o] * fg.d_times;
  }
  for (Eigen::Index h = 0; h < net.w_hidden.rows(); ++h) {
    if (!std::isfinite(fwd.hidden_times[h])) {
      penalise(net.w_hidden, h, trial.input_times, g.d_hidden);
      continue;
    }
    if (d_hidden_times[h] == 0.0) continue;
    const FireGradient fg = fire_time_gradient(row_span(net.w_hidden, h, buf),
                                               vec_span(trial.input_times), net.threshold);
    g.d_hidden.row(h) += d_hidden_times[h] * fg.d_weights.transpose();
  }
  return g;
}

double event_loss(const EventNet& net, const std::vector<XorTrial>& trials,
                  const QuiescencePolicy& policy) {
  double total = 0.0;
  for (const auto& trial : trials) total += event_loss_gradient(net, trial, policy).loss;
  return total / static_cast<double>(trials.size());
}

XorTrainResult train_xor(const XorTrainOptions& options) {
  Rng rng(options.seed);
  XorTrainResult result;
  result.net = EventNet::random(2, options.n_hidden, 2, rng);
  const std::vector<XorTrial> trials = xor_task();

  for (int it = 0; it <= options.max_iterations; ++it) {
    Matrix d_hidden = Matrix::Zero(result.net.w_hidden.rows(), result.net.w_hidden.cols());
    Matrix d_out = Matrix::Zero(result.net.w_out.rows(), result.net.w_out.cols());
    double loss = 0.0;
    int correct = 0;
    for (const auto& trial : trials) {
      const EventGradient g = event_loss_gradient(result.net, trial, options.quiescence);
      d_hidden += g.d_hidden;
      d_out += g.d_out;
      loss += g.loss;
      correct += g.correct ? 1 : 0;
    }
    result.history.push_back(
        XorIteration{it, loss / static_cast<double>(trials.size()), correct});
    if (correct == static_cast<int>(trials.size())) {
      result.solved = true;
      result.iterations_to_solve = it;
      break;
    }
    if (it == options.max_iterations) break;
    if (!std::isfinite(loss) || !d_hidden.allFinite() || !d_out.allFinite()) {
      throw NumericError("train_xor: non-finite loss or gradient");
    }
    // Trial gradients are summed, not averaged.
    result.net.w_hidden -= options.learning_rate * d_hidden;
    result.net.w_out -= options.learning_rate * d_out;
  }
  return result;
}

void write_xor_traces_csv(std::ostream& out, const EventNet& net, double sample_dt,
                          double t_end) {
  out << "trial,label,layer,neuron,t,U,fired\n";
  const std::vector<XorTrial> trials = xor_task();
  std::vector<double> buf;
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const XorTrial& trial = trials[k];
    const EventForward fwd = simulate(net, trial.input_times);
    auto emit = [&](const char* layer, const Matrix& w, const Vector& in_times,
                    const Vector& own_times) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const auto weights = row_span(w, i, buf);
        const auto steps = static_cast<long>(std::llround(t_end / sample_dt));
        for (long s = 0; s <= steps; ++s) {
          const double t = static_cast<double>(s) * sample_dt;
          const bool fired = t >= own_times[i];
          // Frozen at rest after the single spike.
          const double u = fired ? 0.0 : membrane_potential(weights, vec_span(in_times), t);
          out << k << ',' << trial.label << ',' << layer << ',' << i << ','
              << format_double(t) << ',' << format_double(u) << ',' << (fired ? 1 : 0) << '\n';
        }
      }
    };
    emit("hidden", net.w_hidden, trial.input_times, fwd.hidden_times);
    emit("output", net.w_out, fwd.hidden_times, fwd.output_times);
  }
}

}  // namespace spikegrad
