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

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "ode_oracle.hpp"
#include "spikegrad/gradcheck.hpp"
#include "spikegrad/spiketime.hpp"

using namespace spikegrad;

namespace {

std::optional<double> fire(std::vector<double> w, std::vector<double> t, double thr = 1.0) {
  return fire_time(w, t, thr).time;
}

struct Instance {
  std::vector<double> w, t;
};

Instance random_instance(Rng& rng) {
  Instance in;
  const auto n = 1 + rng.below(5);
  for (std::uint64_t k = 0; k < n; ++k) {
    in.w.push_back(rng.uniform(-1.0, 3.0));
    in.t.push_back(rng.uniform(0.0, 3.0));
  }
  return in;
}

// Weights leaning positive so that most draws fire everywhere.
EventNet firing_net(Rng& rng) {
  EventNet net;
  net.w_hidden.resize(4, 2);
  net.w_out.resize(2, 4);
  for (Eigen::Index i = 0; i < net.w_hidden.size(); ++i) {
    net.w_hidden.data()[i] = rng.uniform(-0.5, 3.0);
  }
  for (Eigen::Index i = 0; i < net.w_out.size(); ++i) net.w_out.data()[i] = rng.uniform(-0.5, 1.5);
  return net;
}

bool all_fire(const EventNet& net, const std::vector<XorTrial>& trials) {
  for (const auto& trial : trials) {
    const EventForward f = simulate(net, trial.input_times);
    if (!f.hidden_times.allFinite() || !f.output_times.allFinite()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("closed-form firing time examples") {
  const auto a = fire({2.0}, {0.0});
  REQUIRE(a.has_value());
  CHECK(std::abs(*a - std::log(2.0)) < 1e-12);
  CHECK_FALSE(fire({0.5}, {0.0}).has_value());
  const FireResult b = fire_time(std::vector<double>{1.5, 1.5}, std::vector<double>{0.0, 10.0}, 1.0);
  REQUIRE(b.time.has_value());
  CHECK(*b.time == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(b.causal == std::vector<std::size_t>{0});
  // Needs both inputs: 0.8 alone never reaches threshold.
  const auto c = fire({0.8, 0.8}, {0.0, 1.0});
  REQUIRE(c.has_value());
  CHECK(*c > 1.0);
  CHECK(membrane_potential(std::vector<double>{0.8, 0.8}, std::vector<double>{0.0, 1.0}, *c) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(fire({}, {}).has_value());
  CHECK_FALSE(fire({3.0}, {kNoSpike}).has_value());
  CHECK_THROWS_AS(fire({1.0, 2.0}, {0.0}), ShapeError);
}

TEST_CASE("firing times agree with direct integration") {
  Rng rng(101);
  int compared = 0;
  for (int k = 0; k < 200; ++k) {
    const Instance in = random_instance(rng);
    const double t_end = *std::max_element(in.t.begin(), in.t.end()) + 30.0;
    const auto closed = fire(in.w, in.t);
    const auto ode = spikegrad::testing::ode_fire_time(in.w, in.t, 1.0, 1e-4, t_end);
    if (closed && *closed < t_end - 0.01) {
      REQUIRE(ode.has_value());
      CHECK(std::abs(*ode - *closed) < 1e-3);
      ++compared;
    } else if (!closed || *closed > t_end + 0.01) {
      CHECK_FALSE(ode.has_value());
    }
  }
  CHECK(compared > 50);
}

TEST_CASE("firing-time gradient examples") {
  const FireGradient g =
      fire_time_gradient(std::vector<double>{2.0}, std::vector<double>{0.0}, 1.0);
  CHECK(g.d_weights[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g.d_times[0] == doctest::Approx(1.0).epsilon(1e-12));

  const FireGradient nc = fire_time_gradient(std::vector<double>{1.5, 1.5},
                                             std::vector<double>{0.0, 10.0}, 1.0);
  CHECK(nc.d_weights[1] == 0.0);
  CHECK(nc.d_times[1] == 0.0);

  CHECK_THROWS_AS(fire_time_gradient(std::vector<double>{0.5}, std::vector<double>{0.0}, 1.0),
                  ContractError);
}

TEST_CASE("firing-time gradient matches central differences and is non-positive in weights") {
  Rng rng(7);
  int checked = 0;
  const double h = 1e-6;
  for (int k = 0; k < 300; ++k) {
    const Instance in = random_instance(rng);
    const FireResult r = fire_time(in.w, in.t, 1.0);
    if (!r.time) continue;
    const FireGradient g = fire_time_gradient(in.w, in.t, 1.0);
    for (std::size_t j = 0; j < in.w.size(); ++j) {
      CHECK(g.d_weights[static_cast<Eigen::Index>(j)] <= 0.0);
      Instance up = in, down = in;
      up.w[j] += h;
      down.w[j] -= h;
      const auto tu = fire(up.w, up.t), td = fire(down.w, down.t);
      // Skip the rare case where the perturbation changes the causal set.
      if (!tu || !td || fire_time(up.w, up.t, 1.0).causal != r.causal ||
          fire_time(down.w, down.t, 1.0).causal != r.causal) {
        continue;
      }
      const double fd = (*tu - *td) / (2.0 * h);
      CHECK(g.d_weights[static_cast<Eigen::Index>(j)] ==
            doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("causal set brackets the firing time") {
  Rng rng(13);
  for (int k = 0; k < 500; ++k) {
    const Instance in = random_instance(rng);
    const FireResult r = fire_time(in.w, in.t, 1.0);
    if (!r.time) continue;
    std::vector<bool> member(in.t.size(), false);
    for (std::size_t j : r.causal) member[j] = true;
    for (std::size_t j = 0; j < in.t.size(); ++j) {
      if (member[j]) {
        CHECK(in.t[j] <= *r.time);
      } else {
        CHECK(in.t[j] > *r.time);
      }
    }
    CHECK(*r.time > *std::min_element(in.t.begin(), in.t.end()));
  }
}

TEST_CASE("xor task layout") {
  const auto trials = xor_task();
  REQUIRE(trials.size() == 4);
  CHECK(trials[0].input_times[0] == kEarlySpike);
  CHECK(trials[0].input_times[1] == kEarlySpike);
  CHECK(trials[0].label == 0);
  CHECK(trials[1].input_times[1] == kLateSpike);
  CHECK(trials[1].label == 1);
  CHECK(trials[2].input_times[0] == kLateSpike);
  CHECK(trials[2].label == 1);
  CHECK(trials[3].label == 0);
}

TEST_CASE("first-to-spike loss") {
  Vector same(2);
  same << 1.3, 1.3;
  CHECK(first_to_spike_loss(same, 0).loss == doctest::Approx(std::log(2.0)));
  CHECK(first_to_spike_prediction(same) == -1);
  Vector early(2);
  early << 0.1, 60.0;
  CHECK(first_to_spike_loss(early, 0).loss < 1e-20);
  CHECK(first_to_spike_prediction(early) == 0);
  // Pushing the correct neuron earlier lowers the loss.
  Vector t(2);
  t << 1.0, 1.5;
  const FirstSpikeLoss l = first_to_spike_loss(t, 1);
  CHECK(l.d_times[1] > 0.0);
  CHECK(l.d_times[0] < 0.0);
  Vector silent = Vector::Constant(2, kNoSpike);
  CHECK(first_to_spike_prediction(silent) == -1);
  CHECK_THROWS_AS(first_to_spike_loss(t, 2), ContractError);
}

TEST_CASE("end-to-end spike-time gradient matches finite differences") {
  Rng rng(3);
  const auto trials = xor_task();
  int nets = 0;
  for (int attempt = 0; attempt < 500 && nets < 5; ++attempt) {
    const EventNet net = firing_net(rng);
    if (!all_fire(net, trials)) continue;
    const GradcheckReport r = gradcheck_event(net, trials, {}, 1e-6, 1e-4);
    CHECK(r.max_rel_error() < 1e-4);
    ++nets;
  }
  CHECK(nets == 5);
}

TEST_CASE("shifting all inputs shifts spikes and keeps weight gradients") {
  Rng rng(5);
  const auto trials = xor_task();
  int checked = 0;
  for (int attempt = 0; attempt < 500 && checked < 5; ++attempt) {
    const EventNet net = firing_net(rng);
    if (!all_fire(net, trials)) continue;
    for (const auto& trial : trials) {
      XorTrial shifted = trial;
      shifted.input_times.array() += 2.5;
      const EventForward a = simulate(net, trial.input_times);
      const EventForward b = simulate(net, shifted.input_times);
      CHECK(((b.hidden_times.array() - a.hidden_times.array()) - 2.5).abs().maxCoeff() < 1e-9);
      CHECK(((b.output_times.array() - a.output_times.array()) - 2.5).abs().maxCoeff() < 1e-9);
      const EventGradient ga = event_loss_gradient(net, trial);
      const EventGradient gb = event_loss_gradient(net, shifted);
      CHECK((ga.d_hidden - gb.d_hidden).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((ga.d_out - gb.d_out).cwiseAbs().maxCoeff() < 1e-9);
    }
    ++checked;
  }
  CHECK(checked == 5);
}

TEST_CASE("quiescent outputs are penalised toward firing") {
  EventNet net;
  net.w_hidden = Matrix::Constant(2, 2, 2.0);
  net.w_out = Matrix::Constant(2, 2, 0.1);
  const EventGradient g = event_loss_gradient(net, xor_task()[0]);
  CHECK(std::isfinite(g.loss));
  CHECK(g.loss > std::log(2.0));
  // Descent raises the silent outputs' weights.
  CHECK((g.d_out.array() < 0.0).all());
  CHECK_FALSE(g.correct);
}

TEST_CASE("xor training solves the task") {
  XorTrainOptions opts;
  opts.seed = 1;
  const XorTrainResult r = train_xor(opts);
  CHECK(r.solved);
  CHECK(r.iterations_to_solve >= 0);
  CHECK(r.history.back().correct == 4);
  for (const auto& trial : xor_task()) {
    CHECK(first_to_spike_prediction(simulate(r.net, trial.input_times).output_times) ==
          trial.label);
  }
  // Deterministic for a seed.
  const XorTrainResult again = train_xor(opts);
  CHECK(again.net.w_hidden == r.net.w_hidden);
  CHECK(again.net.w_out == r.net.w_out);
}

TEST_CASE("xor trace export") {
  Rng rng(1);
  const EventNet net = EventNet::random(2, 4, 2, rng);
  std::ostringstream out;
  write_xor_traces_csv(out, net, 0.5, 2.0);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "trial,label,layer,neuron,t,U,fired");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4 * 6 * 5);
}
