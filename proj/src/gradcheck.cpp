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

#include "spikegrad/gradcheck.hpp"

#include <algorithm>
#include <ostream>

#include "spikegrad/forward_learn.hpp"
#include "spikegrad/trainer.hpp"

namespace spikegrad {

double GradcheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const GradcheckRow& r : rows) worst = std::max(worst, r.rel_error);
  return worst;
}

double block_relative_error(const Matrix& analytic, const Matrix& numeric) {
  if (analytic.size() == 0) return 0.0;
  const double diff = (analytic - numeric).cwiseAbs().maxCoeff();
  const double scale = std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(),
                                 kGradcheckFloor});
  return diff / scale;
}

namespace {

GradcheckRow make_row(std::string block, const Matrix& a, const Matrix& f) {
  GradcheckRow row;
  row.block = std::move(block);
  row.analytic = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  row.numeric = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  row.rel_error = block_relative_error(a, f);
  row.all_zero = row.analytic == 0.0;
  return row;
}

// Central difference of `loss` with respect to every entry of `m`.
template <typename LossFn>
Matrix central_difference(Matrix& m, double step, LossFn&& loss) {
  Matrix g(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const double saved = m.data()[k];
    m.data()[k] = saved + step;
    const double up = loss();
    m.data()[k] = saved - step;
    const double down = loss();
    m.data()[k] = saved;
    g.data()[k] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace

GradcheckReport gradcheck_network(const NetworkParams& params, const SpikeRaster& input,
                                  const LossSpec& loss, const BackwardOptions& options,
                                  const SpikeFunction& spike_fn, bool use_rtrl, double step,
                                  double tolerance) {
  GradientSet analytic;
  if (use_rtrl) {
    analytic = rtrl(params, input, loss, RtrlOptions{options, true}, spike_fn).grad;
  } else {
    analytic = bptt(run_network(params, input, -1, spike_fn), params, loss, options);
  }
  NetworkParams probe = params;
  auto value = [&] { return loss_value(run_network(probe, input, -1, spike_fn), loss); };

  GradcheckReport report;
  report.tolerance = tolerance;
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l + 1);
    const Matrix fw = central_difference(probe.layers[l].w, step, value);
    report.rows.push_back(make_row(prefix + ".W", analytic.dw[l], fw));
    if (probe.layers[l].v) {
      const Matrix fv = central_difference(*probe.layers[l].v, step, value);
      report.rows.push_back(make_row(prefix + ".V", *analytic.dv[l], fv));
    }
  }
  return report;
}

GradcheckReport gradcheck_event(const EventNet& net, const std::vector<XorTrial>& trials,
                                const QuiescencePolicy& policy, double step, double tolerance) {
  Matrix d_hidden = Matrix::Zero(net.w_hidden.rows(), net.w_hidden.cols());
  Matrix d_out = Matrix::Zero(net.w_out.rows(), net.w_out.cols());
  for (const XorTrial& t : trials) {
    const EventGradient g = event_loss_gradient(net, t, policy);
    d_hidden += g.d_hidden;
    d_out += g.d_out;
  }
  EventNet probe = net;
  const auto n = static_cast<double>(trials.size());
  auto value = [&] { return event_loss(probe, trials, policy) * n; };

  GradcheckReport report;
  report.tolerance = tolerance;
  const Matrix fh = central_difference(probe.w_hidden, step, value);
  report.rows.push_back(make_row("hidden.W", d_hidden, fh));
  const Matrix fo = central_difference(probe.w_out, step, value);
  report.rows.push_back(make_row("output.W", d_out, fo));
  return report;
}

GradcheckReport gradcheck(const ExperimentConfig& config) {
  config.validate();
  if (config.task == TaskKind::kXor) {
    Rng rng(config.seed);
    const EventNet net = EventNet::random(2, config.xor_hidden, 2, rng);
    return gradcheck_event(net, xor_task());
  }
  Rng rng(config.seed);
  const NetworkParams params = build_network(config, rng);
  const Dataset data = build_dataset(config);
  const BackwardOptions options{config.surrogate_spec(), config.detach_reset};
  return gradcheck_network(params, data.train.front().input, data.train.front().loss, options,
                           config.spike_function(), config.method == Method::kRtrl);
}

void write_gradcheck_csv(std::ostream& out, const GradcheckReport& report) {
  out << "block,analytic,numeric,rel_error,status\n";
  for (const GradcheckRow& r : report.rows) {
    const char* status = r.all_zero ? "zero" : (r.rel_error <= report.tolerance ? "pass" : "fail");
    out << r.block << ',' << format_double(r.analytic) << ',' << format_double(r.numeric) << ','
        << format_double(r.rel_error) << ',' << status << '\n';
  }
}

}  // namespace spikegrad
