// Copyright 2026 The Shiftscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shiftscope/kliep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/rng.hpp"

namespace shiftscope {
namespace {

using nlohmann::json;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename T>
RatioOutput forward_impl(const RatioModel& model, std::span<const T> z) {
  if (z.size() != model.input_dim) {
    fail(ErrorCode::kDimensionMismatch,
         "input has dim " + std::to_string(z.size()) + ", model expects " +
             std::to_string(model.input_dim));
  }
  RatioOutput out;
  out.hidden.resize(model.hidden_dim);
  double head = model.b;
  for (std::size_t h = 0; h < model.hidden_dim; ++h) {
    const double* row = model.w1.data() + h * model.input_dim;
    double u = model.b1[h];
    for (std::size_t k = 0; k < model.input_dim; ++k) {
      u += row[k] * static_cast<double>(z[k]);
    }
    const double d = u > 0.0 ? u : 0.0;
    out.hidden[h] = d;
    head += model.w[h] * d;
  }
  out.head = head;
  out.ratio = softplus(head);
  return out;
}

// Accumulates dL/dparams for one row given dL/dhead.
void accumulate(const RatioModel& model, std::span<const float> z,
                const RatioOutput& fwd, double grad_head, RatioGradient& g) {
  g.b += grad_head;
  for (std::size_t h = 0; h < model.hidden_dim; ++h) {
    g.w[h] += grad_head * fwd.hidden[h];
    if (fwd.hidden[h] <= 0.0) continue;
    const double grad_u = grad_head * model.w[h];
    g.b1[h] += grad_u;
    double* row = g.w1.data() + h * model.input_dim;
    for (std::size_t k = 0; k < model.input_dim; ++k) {
      row[k] += grad_u * static_cast<double>(z[k]);
    }
  }
}

bool all_finite(const RatioModel& model) {
  const auto finite = [](double v) { return std::isfinite(v); };
  return std::ranges::all_of(model.w1, finite) &&
         std::ranges::all_of(model.b1, finite) &&
         std::ranges::all_of(model.w, finite) && std::isfinite(model.b);
}

std::vector<double> vector_from(const json& j, std::size_t expected,
                                const char* what) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != expected) {
    fail(ErrorCode::kParseError, std::string("model field ") + what +
                                     " has wrong length");
  }
  return v;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorCode::kInvalidArgument, "learning rate must be > 0");
  }
  if (batch_size < 1) fail(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (hidden_dim < 1) fail(ErrorCode::kInvalidArgument, "hidden dim must be >= 1");
}

RatioModel zero_ratio_model(std::size_t input_dim, std::size_t hidden_dim) {
  RatioModel model;
  model.input_dim = input_dim;
  model.hidden_dim = hidden_dim;
  model.w1.assign(input_dim * hidden_dim, 0.0);
  model.b1.assign(hidden_dim, 0.0);
  model.w.assign(hidden_dim, 0.0);
  return model;
}

RatioModel init_ratio_model(std::size_t input_dim, std::size_t hidden_dim,
                            std::uint64_t seed) {
  RatioModel model = zero_ratio_model(input_dim, hidden_dim);
  model.seed = seed;
  Rng rng(seed);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& v : model.w1) v = rng.uniform(-bound1, bound1);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (double& v : model.w) v = rng.uniform(-bound2, bound2);
  return model;
}

double softplus(double x) {
  const double r = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  // exp underflows below about -745; keep the ratio strictly positive.
  return r > 0.0 ? r : std::numeric_limits<double>::denorm_min();
}

RatioOutput ratio_forward(const RatioModel& model, std::span<const double> z) {
  return forward_impl(model, z);
}

RatioOutput ratio_forward(const RatioModel& model, std::span<const float> z) {
  return forward_impl(model, z);
}

double kliep_loss(std::span<const double> ratios_test,
                  std::span<const double> ratios_train) {
  if (ratios_test.empty() || ratios_train.empty()) {
    fail(ErrorCode::kSplitEmpty, "KLIEP loss needs both splits");
  }
  double test_sum = 0.0;
  for (const double r : ratios_test) {
    if (!(r > 0.0)) fail(ErrorCode::kNonPositiveRatio, "test ratio must be > 0");
    test_sum += r;
  }
  double train_sum = 0.0;
  for (const double r : ratios_train) {
    if (!(r > 0.0)) fail(ErrorCode::kNonPositiveRatio, "train ratio must be > 0");
    train_sum += std::log(r);
  }
  return test_sum / static_cast<double>(ratios_test.size()) -
         train_sum / static_cast<double>(ratios_train.size());
}

RatioGradient kliep_gradient(const RatioModel& model, const LatentSpace& space,
                             std::span<const std::size_t> train_batch,
                             std::span<const std::size_t> test_batch) {
  if (train_batch.empty() || test_batch.empty()) {
    fail(ErrorCode::kSplitEmpty, "KLIEP gradient needs both batches");
  }
  if (space.dim() != model.input_dim) {
    fail(ErrorCode::kDimensionMismatch, "space dim does not match model");
  }
  RatioGradient g;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(model.hidden_dim, 0.0);
  g.w.assign(model.hidden_dim, 0.0);

  const double inv_te = 1.0 / static_cast<double>(test_batch.size());
  for (const std::size_t i : test_batch) {
    const auto z = space.row(i);
    const RatioOutput fwd = forward_impl(model, z);
    accumulate(model, z, fwd, inv_te * sigmoid(fwd.head), g);
  }
  const double inv_tr = 1.0 / static_cast<double>(train_batch.size());
  for (const std::size_t i : train_batch) {
    const auto z = space.row(i);
    const RatioOutput fwd = forward_impl(model, z);
    accumulate(model, z, fwd, -inv_tr * sigmoid(fwd.head) / fwd.ratio, g);
  }
  return g;
}

double kliep_objective(const RatioModel& model, const LatentSpace& space,
                       std::span<const std::size_t> train_rows,
                       std::span<const std::size_t> test_rows) {
  std::vector<double> test_ratios;
  test_ratios.reserve(test_rows.size());
  for (const std::size_t i : test_rows) {
    test_ratios.push_back(forward_impl(model, space.row(i)).ratio);
  }
  std::vector<double> train_ratios;
  train_ratios.reserve(train_rows.size());
  for (const std::size_t i : train_rows) {
    train_ratios.push_back(forward_impl(model, space.row(i)).ratio);
  }
  return kliep_loss(test_ratios, train_ratios);
}

TrainedRatioModel fit_ratio_model(const LatentSpace& space,
                                  std::span<const std::size_t> train_rows,
                                  std::span<const std::size_t> test_rows,
                                  const TrainConfig& config) {
  config.validate();
  if (train_rows.empty() || test_rows.empty()) {
    fail(ErrorCode::kSplitEmpty, train_rows.empty() ? "train split is empty"
                                                    : "test split is empty");
  }
  TrainedRatioModel out;
  out.config = config;
  out.model = init_ratio_model(space.dim(), config.hidden_dim, config.seed);
  RatioModel& model = out.model;
  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<std::size_t> train_order(train_rows.begin(), train_rows.end());
  std::vector<std::size_t> test_order(test_rows.begin(), test_rows.end());
  const std::size_t longest = std::max(train_order.size(), test_order.size());
  const std::size_t steps = (longest + config.batch_size - 1) / config.batch_size;
  std::vector<std::size_t> train_batch;
  std::vector<std::size_t> test_batch;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(train_order));
    rng.shuffle(std::span(test_order));
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t begin = step * config.batch_size;
      const std::size_t size = std::min(config.batch_size, longest - begin);
      train_batch.clear();
      test_batch.clear();
      // The shorter split wraps around its own shuffled order.
      for (std::size_t k = begin; k < begin + size; ++k) {
        train_batch.push_back(train_order[k % train_order.size()]);
        test_batch.push_back(test_order[k % test_order.size()]);
      }
      const RatioGradient g = kliep_gradient(model, space, train_batch, test_batch);
      const double lr = config.learning_rate;
      for (std::size_t k = 0; k < model.w1.size(); ++k) model.w1[k] -= lr * g.w1[k];
      for (std::size_t h = 0; h < model.hidden_dim; ++h) {
        model.b1[h] -= lr * g.b1[h];
        model.w[h] -= lr * g.w[h];
      }
      model.b -= lr * g.b;
      if (!all_finite(model)) {
        fail(ErrorCode::kDivergedLoss, "non-finite parameters in epoch " +
                                           std::to_string(epoch + 1));
      }
    }
    const double loss = kliep_objective(model, space, train_rows, test_rows);
    if (!std::isfinite(loss)) {
      fail(ErrorCode::kDivergedLoss,
           "non-finite loss after epoch " + std::to_string(epoch + 1));
    }
    out.history.push_back(loss);
  }
  return out;
}

DreTrainResult train_dre(const AnalysisStore& store,
                         const std::string& space_name,
                         const TrainConfig& config) {
  const LatentSpace& space = store.space(space_name);
  store.require_both_splits();
  TrainedRatioModel trained = fit_ratio_model(space, store.train_indices(),
                                              store.test_indices(), config);
  LatentSpace dre = dre_latent(trained.model, space);
  return {std::move(trained), std::move(dre)};
}

LatentSpace dre_latent(const RatioModel& model, const LatentSpace& space,
                       std::string name) {
  if (space.dim() != model.input_dim) {
    fail(ErrorCode::kDimensionMismatch, "space dim does not match model");
  }
  std::vector<float> values;
  values.reserve(space.count() * model.hidden_dim);
  for (std::size_t i = 0; i < space.count(); ++i) {
    const RatioOutput fwd = forward_impl(model, space.row(i));
    for (const double d : fwd.hidden) values.push_back(static_cast<float>(d));
  }
  return LatentSpace(std::move(name), model.hidden_dim, std::move(values));
}

std::vector<double> ratios_for(const RatioModel& model,
                               const LatentSpace& space) {
  if (space.dim() != model.input_dim) {
    fail(ErrorCode::kDimensionMismatch, "space dim does not match model");
  }
  std::vector<double> ratios(space.count());
  for (std::size_t i = 0; i < space.count(); ++i) {
    ratios[i] = forward_impl(model, space.row(i)).ratio;
  }
  return ratios;
}

std::string model_to_json(const TrainedRatioModel& trained) {
  const RatioModel& m = trained.model;
  json w1 = json::array();
  for (std::size_t h = 0; h < m.hidden_dim; ++h) {
    w1.push_back(std::vector<double>(m.w1.begin() + h * m.input_dim,
                                     m.w1.begin() + (h + 1) * m.input_dim));
  }
  const TrainConfig& c = trained.config;
  json doc = {
      {"input_dim", m.input_dim},
      {"hidden_dim", m.hidden_dim},
      {"seed", m.seed},
      {"W1", std::move(w1)},
      {"b1", m.b1},
      {"W", json::array({m.w})},
      {"b", m.b},
      {"config",
       {{"epochs", c.epochs},
        {"learning_rate", c.learning_rate},
        {"batch_size", c.batch_size},
        {"hidden_dim", c.hidden_dim},
        {"seed", c.seed}}},
      {"history", trained.history},
  };
  return doc.dump(1) + "\n";
}

TrainedRatioModel model_from_json(const std::string& text) {
  TrainedRatioModel out;
  try {
    const json doc = json::parse(text);
    RatioModel& m = out.model;
    m.input_dim = doc.at("input_dim").get<std::size_t>();
    m.hidden_dim = doc.at("hidden_dim").get<std::size_t>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    const auto& rows = doc.at("W1");
    if (!rows.is_array() || rows.size() != m.hidden_dim) {
      fail(ErrorCode::kParseError, "model field W1 has wrong shape");
    }
    for (const auto& row : rows) {
      const auto values = vector_from(row, m.input_dim, "W1");
      m.w1.insert(m.w1.end(), values.begin(), values.end());
    }
    m.b1 = vector_from(doc.at("b1"), m.hidden_dim, "b1");
    const auto& head = doc.at("W");
    if (!head.is_array() || head.size() != 1) {
      fail(ErrorCode::kParseError, "model field W must be 1 x hidden_dim");
    }
    m.w = vector_from(head[0], m.hidden_dim, "W");
    m.b = doc.at("b").get<double>();
    if (const auto it = doc.find("config"); it != doc.end()) {
      TrainConfig& c = out.config;
      c.epochs = it->value("epochs", c.epochs);
      c.learning_rate = it->value("learning_rate", c.learning_rate);
      c.batch_size = it->value("batch_size", c.batch_size);
      c.hidden_dim = it->value("hidden_dim", m.hidden_dim);
      c.seed = it->value("seed", m.seed);
    }
    if (const auto it = doc.find("history"); it != doc.end()) {
      out.history = it->get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("model.json: ") + e.what());
  }
  if (!all_finite(out.model)) {
    fail(ErrorCode::kNonFiniteValue, "model.json holds non-finite parameters");
  }
  return out;
}

void save_model(const std::filesystem::path& path,
                const TrainedRatioModel& trained) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << model_to_json(trained);
}

TrainedRatioModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingModel, "no model at " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace shiftscope
