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

#include "spikegrad/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <type_traits>

namespace spikegrad {

TaskKind parse_task_kind(std::string_view name) {
  if (name == "xor") return TaskKind::kXor;
  if (name == "pattern") return TaskKind::kPattern;
  if (name == "superspike-target") return TaskKind::kSpikeTarget;
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (expected xor|pattern|superspike-target)");
}

std::string_view task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kXor:
      return "xor";
    case TaskKind::kPattern:
      return "pattern";
    case TaskKind::kSpikeTarget:
      return "superspike-target";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "bptt") return Method::kBptt;
  if (name == "rtrl") return Method::kRtrl;
  if (name == "superspike") return Method::kSuperSpike;
  if (name == "fa") return Method::kFa;
  if (name == "dfa") return Method::kDfa;
  if (name == "local") return Method::kLocal;
  if (name == "spiketime") return Method::kSpikeTime;
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected bptt|rtrl|superspike|fa|dfa|local|spiketime)");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kBptt:
      return "bptt";
    case Method::kRtrl:
      return "rtrl";
    case Method::kSuperSpike:
      return "superspike";
    case Method::kFa:
      return "fa";
    case Method::kDfa:
      return "dfa";
    case Method::kLocal:
      return "local";
    case Method::kSpikeTime:
      return "spiketime";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) +
                    "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

std::vector<Eigen::Index> parse_sizes(std::string_view key, std::string_view value) {
  std::vector<Eigen::Index> sizes;
  value = trim(value);
  while (!value.empty()) {
    const auto comma = value.find(',');
    const std::string_view item = trim(value.substr(0, comma));
    sizes.push_back(parse_number<Eigen::Index>(key, item));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return sizes;
}

struct Field {
  std::string_view key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string show(bool b) { return b ? "true" : "false"; }
std::string show(double d) { return format_double(d); }
template <typename I>
  requires std::is_integral_v<I>
std::string show(I i) { return std::to_string(i); }

#define SG_NUM(name, member)                                                        \
  Field {                                                                           \
    name,                                                                           \
        [](ExperimentConfig& c, std::string_view v) {                               \
          c.member = parse_number<decltype(c.member)>(name, v);                     \
        },                                                                          \
        [](const ExperimentConfig& c) { return show(c.member); }                    \
  }
#define SG_BOOL(name, member)                                                                  \
  Field {                                                                                      \
    name, [](ExperimentConfig& c, std::string_view v) { c.member = parse_bool(name, v); },     \
        [](const ExperimentConfig& c) { return show(c.member); }                               \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"task", [](ExperimentConfig& c, std::string_view v) { c.task = parse_task_kind(v); },
            [](const ExperimentConfig& c) { return std::string(task_name(c.task)); }},
      Field{"method", [](ExperimentConfig& c, std::string_view v) { c.method = parse_method(v); },
            [](const ExperimentConfig& c) { return std::string(method_name(c.method)); }},
      Field{"loss",
            [](ExperimentConfig& c, std::string_view v) {
              if (v != "auto") parse_loss_kind(v);
              c.loss = std::string(v);
            },
            [](const ExperimentConfig& c) { return c.loss; }},
      Field{"surrogate",
            [](ExperimentConfig& c, std::string_view v) { c.surrogate = parse_surrogate_kind(v); },
            [](const ExperimentConfig& c) { return std::string(surrogate_name(c.surrogate)); }},
      SG_NUM("surrogate_scale", surrogate_scale),
      SG_BOOL("detach_reset", detach_reset),
      SG_BOOL("online", online),
      SG_NUM("inputs", inputs),
      SG_NUM("classes", classes),
      Field{"hidden",
            [](ExperimentConfig& c, std::string_view v) { c.hidden = parse_sizes("hidden", v); },
            [](const ExperimentConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.hidden.size(); ++i) {
                if (i > 0) out += ',';
                out += std::to_string(c.hidden[i]);
              }
              return out;
            }},
      SG_BOOL("recurrent", recurrent),
      SG_NUM("dt", dt),
      SG_NUM("tau_syn", tau_syn),
      SG_NUM("tau_mem", tau_mem),
      SG_NUM("threshold", threshold),
      SG_NUM("steps", steps),
      SG_NUM("epsilon_tau", epsilon_tau),
      SG_NUM("target_period", target_period),
      SG_NUM("target_spikes", target_spikes),
      SG_NUM("soft_steepness", soft_steepness),
      SG_NUM("weight_scale", weight_scale),
      SG_NUM("recurrent_scale", recurrent_scale),
      SG_NUM("input_rate", input_rate),
      SG_NUM("train_per_class", train_per_class),
      SG_NUM("test_per_class", test_per_class),
      SG_NUM("jitter_delete", jitter_delete),
      SG_NUM("jitter_shift", jitter_shift),
      SG_NUM("batch_size", batch_size),
      SG_NUM("learning_rate", learning_rate),
      SG_NUM("epochs", epochs),
      SG_NUM("clip_norm", clip_norm),
      Field{"local_loss",
            [](ExperimentConfig& c, std::string_view v) {
              parse_local_loss_kind(v);
              c.local_loss = std::string(v);
            },
            [](const ExperimentConfig& c) { return c.local_loss; }},
      SG_NUM("local_decay", local_decay),
      SG_NUM("xor_hidden", xor_hidden),
      SG_BOOL("rtrl_force", rtrl_force),
      SG_NUM("seed", seed),
      SG_NUM("data_seed", data_seed),
      SG_NUM("feedback_seed", feedback_seed),
  };
  return table;
}

#undef SG_NUM
#undef SG_BOOL

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void ExperimentConfig::merge(std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash_pos = view.find('#'); hash_pos != std::string_view::npos) {
      view = view.substr(0, hash_pos);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    set(view.substr(0, eq), view.substr(eq + 1));
  }
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(inputs >= 1, "inputs must be positive");
  require(classes >= 2, "classes must be at least 2");
  for (Eigen::Index h : hidden) require(h >= 1, "hidden layer sizes must be positive");
  require(steps >= 1, "steps must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(epochs >= 0, "epochs must be non-negative");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate),
          "learning_rate must be finite and non-negative");
  require(clip_norm >= 0.0, "clip_norm must be non-negative");
  require(surrogate_scale >= 0.0, "surrogate_scale must be non-negative (0 selects the default)");
  require(soft_steepness >= 0.0, "soft_steepness must be non-negative");
  require(weight_scale >= 0.0 && recurrent_scale >= 0.0, "weight scales must be non-negative");
  require(epsilon_tau > 0.0, "epsilon_tau must be positive");
  require(target_period >= 1, "target_period must be positive");
  require(local_decay >= 0.0 && local_decay < 1.0, "local_decay must lie in [0,1)");
  require(xor_hidden >= 1, "xor_hidden must be positive");
  surrogate_spec().validate();
  neuron_config().validate();

  const bool event = method == Method::kSpikeTime;
  require(event == (task == TaskKind::kXor), "the xor task runs with method spiketime only");
  if (event) return;
  const LossKind lk = loss_kind();
  if (task == TaskKind::kSpikeTarget) {
    require(lk == LossKind::kVanRossum, "superspike-target task needs the van Rossum loss");
  }
  if (method == Method::kSuperSpike) {
    require(lk == LossKind::kVanRossum, "superspike needs the van Rossum loss");
    require(hidden.size() <= 1, "superspike supports at most one hidden layer");
    require(!recurrent, "superspike does not support recurrent weights");
    require(soft_steepness == 0.0, "superspike runs the hard-threshold forward pass only");
  }
  require(!online || method == Method::kSuperSpike, "online updates need method superspike");
  if (task == TaskKind::kPattern) {
    require(train_per_class >= 1, "train_per_class must be positive");
    require(test_per_class >= 0, "test_per_class must be non-negative");
  }
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const Field& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(*this);
    out += '\n';
  }
  return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical_text()); }

SurrogateSpec ExperimentConfig::surrogate_spec() const {
  SurrogateSpec spec = SurrogateSpec::with_default_scale(surrogate);
  if (surrogate_scale > 0.0) spec.scale = surrogate_scale;
  return spec;
}

LossKind ExperimentConfig::loss_kind() const {
  if (loss != "auto") return parse_loss_kind(loss);
  if (task == TaskKind::kSpikeTarget || method == Method::kSuperSpike) {
    return LossKind::kVanRossum;
  }
  return LossKind::kMaxVoltageCrossEntropy;
}

NeuronConfig ExperimentConfig::neuron_config() const {
  return NeuronConfig::from_time_constants(dt, tau_syn, tau_mem, threshold);
}

PatternTaskSpec ExperimentConfig::pattern_spec() const {
  PatternTaskSpec spec;
  spec.n_classes = classes;
  spec.n_inputs = inputs;
  spec.steps = steps;
  spec.dt = dt;
  spec.rate_hz = input_rate;
  spec.train_per_class = train_per_class;
  spec.test_per_class = test_per_class;
  spec.jitter = JitterSpec{jitter_delete, jitter_shift};
  return spec;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ExperimentConfig config;
  config.merge(in);
  return config;
}

NetworkParams build_network(const ExperimentConfig& config, Rng& rng) {
  const NeuronConfig cfg = config.neuron_config();
  NetworkParams params;
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    const double sd = scale / std::sqrt(static_cast<double>(cols));
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = sd * rng.normal();
    }
    return m;
  };
  Eigen::Index fan_in = config.inputs;
  for (Eigen::Index h : config.hidden) {
    LayerParams layer{gaussian(h, fan_in, config.weight_scale), std::nullopt, cfg};
    if (config.recurrent) layer.v = gaussian(h, h, config.recurrent_scale);
    params.layers.push_back(std::move(layer));
    fan_in = h;
  }
  const bool readout = config.loss_kind() == LossKind::kMaxVoltageCrossEntropy;
  params.layers.push_back(LayerParams{gaussian(config.classes, fan_in, config.weight_scale),
                                      std::nullopt, readout ? cfg.as_readout() : cfg});
  params.validate();
  return params;
}

}  // namespace spikegrad
