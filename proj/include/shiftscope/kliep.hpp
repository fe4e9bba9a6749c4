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

#ifndef SHIFTSCOPE_KLIEP_HPP_
#define SHIFTSCOPE_KLIEP_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shiftscope/core_data.hpp"

namespace shiftscope {

// Two-layer density-ratio network. The hidden layer maps an embedding z to
// d = max(0, W1 z + b1); the head maps d to r = ln(exp(w . d + b) + 1).
struct RatioModel {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::vector<double> w1;  // hidden_dim x input_dim, row-major
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w;   // hidden_dim
  double b = 0.0;
  std::uint64_t seed = 0;

  std::size_t parameter_count() const {
    return w1.size() + b1.size() + w.size() + 1;
  }
};

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 0.01;
  std::size_t batch_size = 64;
  std::size_t hidden_dim = 32;
  std::uint64_t seed = 0;

  // Throws InvalidArgument.
  void validate() const;
};

// Full-data KLIEP loss after each epoch.
using TrainHistory = std::vector<double>;

// All-zero parameters.
RatioModel zero_ratio_model(std::size_t input_dim, std::size_t hidden_dim);

// Weights uniform in +-1/sqrt(fan_in), biases zero.
RatioModel init_ratio_model(std::size_t input_dim, std::size_t hidden_dim,
                            std::uint64_t seed);

// Numerically stable ln(1 + e^x); never returns 0 for finite x.
double softplus(double x);

struct RatioOutput {
  std::vector<double> hidden;  // d
  double head = 0.0;           // w . d + b
  double ratio = 0.0;          // r(d)
};

RatioOutput ratio_forward(const RatioModel& model, std::span<const double> z);
RatioOutput ratio_forward(const RatioModel& model, std::span<const float> z);

// (1/n_te) sum r_te - (1/n_tr) sum ln r_tr.
double kliep_loss(std::span<const double> ratios_test,
                  std::span<const double> ratios_train);

struct RatioGradient {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w;
  double b = 0.0;
};

// Analytic gradient of kliep_loss over the rows of `space` selected by the
// two batches.
RatioGradient kliep_gradient(const RatioModel& model, const LatentSpace& space,
                             std::span<const std::size_t> train_batch,
                             std::span<const std::size_t> test_batch);

// kliep_loss evaluated through the model on the selected rows.
double kliep_objective(const RatioModel& model, const LatentSpace& space,
                       std::span<const std::size_t> train_rows,
                       std::span<const std::size_t> test_rows);

struct TrainedRatioModel {
  RatioModel model;
  TrainConfig config;
  TrainHistory history;
};

// Minibatch SGD on paired train/test minibatches over rows of `space`.
TrainedRatioModel fit_ratio_model(const LatentSpace& space,
                                  std::span<const std::size_t> train_rows,
                                  std::span<const std::size_t> test_rows,
                                  const TrainConfig& config);

struct DreTrainResult {
  TrainedRatioModel trained;
  LatentSpace dre;
};

// Trains on the store's train/test splits of `space_name` and derives the
// "dre" latent space for every instance.
DreTrainResult train_dre(const AnalysisStore& store,
                         const std::string& space_name,
                         const TrainConfig& config);

// Row i holds the hidden activation d of instance i.
LatentSpace dre_latent(const RatioModel& model, const LatentSpace& space,
                       std::string name = "dre");

// Ratio r for every row of `space`.
std::vector<double> ratios_for(const RatioModel& model,
                               const LatentSpace& space);

std::string model_to_json(const TrainedRatioModel& trained);
TrainedRatioModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path,
                const TrainedRatioModel& trained);
TrainedRatioModel load_model(const std::filesystem::path& path);

}  // namespace shiftscope

#endif  // SHIFTSCOPE_KLIEP_HPP_
