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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "shiftscope/error.hpp"
#include "shiftscope/kliep.hpp"
#include "test_support.hpp"

using namespace shiftscope;
using shiftscope::testing::TempDir;

namespace {

std::vector<double> flatten(const RatioModel& m) {
  std::vector<double> p = m.w1;
  p.insert(p.end(), m.b1.begin(), m.b1.end());
  p.insert(p.end(), m.w.begin(), m.w.end());
  p.push_back(m.b);
  return p;
}

RatioModel unflatten(RatioModel m, const std::vector<double>& p) {
  std::size_t k = 0;
  for (double& v : m.w1) v = p[k++];
  for (double& v : m.b1) v = p[k++];
  for (double& v : m.w) v = p[k++];
  m.b = p[k];
  return m;
}

std::vector<double> flatten(const RatioGradient& g) {
  std::vector<double> p = g.w1;
  p.insert(p.end(), g.b1.begin(), g.b1.end());
  p.insert(p.end(), g.w.begin(), g.w.end());
  p.push_back(g.b);
  return p;
}

// Two-layer forward pass written out scalar by scalar.
double straight_line_ratio(const RatioModel& m, const std::vector<double>& z,
                           std::vector<double>* hidden = nullptr) {
  double head = m.b;
  for (std::size_t h = 0; h < m.hidden_dim; ++h) {
    double u = m.b1[h];
    for (std::size_t k = 0; k < m.input_dim; ++k) u += m.w1[h * m.input_dim + k] * z[k];
    const double d = std::max(0.0, u);
    if (hidden) hidden->push_back(d);
    head += m.w[h] * d;
  }
  return std::log(std::exp(head) + 1.0);
}

RatioModel random_model(std::size_t in, std::size_t hidden, std::mt19937_64& gen,
                        double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  RatioModel m = zero_ratio_model(in, hidden);
  for (double& v : m.w1) v = normal(gen);
  for (double& v : m.b1) v = normal(gen);
  for (double& v : m.w) v = normal(gen);
  m.b = normal(gen);
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

}  // namespace

TEST_CASE("forward: zero model gives ln 2") {
  const RatioModel m = zero_ratio_model(3, 4);
  const std::vector<double> z = {1.5, -2.0, 7.0};
  const RatioOutput out = ratio_forward(m, std::span<const double>(z));
  CHECK(out.ratio == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(out.ratio == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::ranges::all_of(out.hidden, [](double d) { return d == 0.0; }));
}

TEST_CASE("forward: head-only value when the hidden layer is zero") {
  RatioModel m = zero_ratio_model(2, 3);
  m.w = {0.7, -3.0, 11.0};
  m.b = 5.0;
  const std::vector<double> z = {4.0, -1.0};
  CHECK(ratio_forward(m, std::span<const double>(z)).ratio ==
        doctest::Approx(5.006715).epsilon(1e-6));
}

TEST_CASE("forward matches a straight-line recomputation") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const RatioModel m = random_model(5, 7, gen);
    std::vector<double> z(5);
    for (double& v : z) v = normal(gen);
    std::vector<double> hidden;
    const double expected = straight_line_ratio(m, z, &hidden);
    const RatioOutput out = ratio_forward(m, std::span<const double>(z));
    CHECK(out.ratio == doctest::Approx(expected).epsilon(1e-12));
    for (std::size_t h = 0; h < hidden.size(); ++h) {
      CHECK(out.hidden[h] == doctest::Approx(hidden[h]).epsilon(1e-12));
    }
  }
  const RatioModel m = random_model(5, 7, gen);
  const std::vector<double> wrong(4, 0.0);
  CHECK(code_of([&] { ratio_forward(m, std::span<const double>(wrong)); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("property: ratio is strictly positive") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal(0.0, 30.0);
  for (int trial = 0; trial < 500; ++trial) {
    const RatioModel m = random_model(4, 6, gen, 20.0);
    std::vector<double> z(4);
    for (double& v : z) v = normal(gen);
    const double r = ratio_forward(m, std::span<const double>(z)).ratio;
    REQUIRE(r > 0.0);
    REQUIRE(std::isfinite(r));
  }
  RatioModel far = zero_ratio_model(1, 1);
  far.b = -5000.0;
  const std::vector<double> z = {0.0};
  CHECK(ratio_forward(far, std::span<const double>(z)).ratio > 0.0);
  CHECK(softplus(-800.0) > 0.0);
  CHECK(softplus(800.0) == doctest::Approx(800.0));
}

TEST_CASE("kliep loss values") {
  const std::vector<double> ones(4, 1.0);
  CHECK(kliep_loss(ones, ones) == doctest::Approx(1.0));
  const std::vector<double> te = {1.0};
  const std::vector<double> tr = {std::exp(1.0)};
  CHECK(kliep_loss(te, tr) == doctest::Approx(0.0).epsilon(1e-15));
  // 1.25 - ln(4) / 2 by hand.
  const std::vector<double> te2 = {0.5, 2.0};
  const std::vector<double> tr2 = {1.0, 4.0};
  CHECK(kliep_loss(te2, tr2) == doctest::Approx(0.556853).epsilon(1e-6));

  const std::vector<double> empty;
  CHECK(code_of([&] { kliep_loss(empty, ones); }) == ErrorCode::kSplitEmpty);
  const std::vector<double> zero = {0.0};
  CHECK(code_of([&] { kliep_loss(ones, zero); }) == ErrorCode::kNonPositiveRatio);
  const std::vector<double> negative = {-1.0};
  CHECK(code_of([&] { kliep_loss(negative, ones); }) == ErrorCode::kNonPositiveRatio);
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 gen(5);
  std::normal_distribution<float> normal;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<float> values(40 * 5);
    for (float& v : values) v = normal(gen);
    const LatentSpace space("z", 5, values);
    std::vector<std::size_t> train(20), test(20);
    std::iota(train.begin(), train.end(), 0);
    std::iota(test.begin(), test.end(), 20);
    const RatioModel model = random_model(5, 4, gen, 0.5);

    const auto analytic = flatten(kliep_gradient(model, space, train, test));
    const auto params = flatten(model);
    const double step = 1e-4;
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto plus = params;
      auto minus = params;
      plus[k] += step;
      minus[k] -= step;
      const double numeric =
          (kliep_objective(unflatten(model, plus), space, train, test) -
           kliep_objective(unflatten(model, minus), space, train, test)) /
          (2 * step);
      const double scale = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic[k]) / scale);
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("gradient vanishes at a stationary point") {
  // With every hidden unit inactive the loss is r(b) - ln r(b), minimized
  // where r(b) = 1.
  RatioModel m = zero_ratio_model(2, 3);
  m.b1 = {-100.0, -100.0, -100.0};
  m.b = std::log(std::exp(1.0) - 1.0);
  const LatentSpace space("z", 2, {0.1f, 0.2f, -0.3f, 0.4f, 0.5f, -0.6f});
  const std::vector<std::size_t> train = {0, 1};
  const std::vector<std::size_t> test = {2};
  const auto g = flatten(kliep_gradient(m, space, train, test));
  for (const double v : g) CHECK(std::abs(v) < 1e-6);

  const double step = 1e-4;
  auto plus = flatten(m);
  auto minus = plus;
  plus.back() += step;
  minus.back() -= step;
  const double numeric = (kliep_objective(unflatten(m, plus), space, train, test) -
                          kliep_objective(unflatten(m, minus), space, train, test)) /
                         (2 * step);
  CHECK(std::abs(numeric) < 1e-6);
}

TEST_CASE("head gradient by hand with the rectifier inactive") {
  // One train and one test point, d = 0, so head = b and
  // dL/db = s(b) (1 - 1/r(b)), dL/dw = 0, hidden gradients 0.
  RatioModel m = zero_ratio_model(2, 2);
  m.w1 = {1.0, 0.0, 0.0, 1.0};
  m.b1 = {-10.0, -10.0};
  m.w = {0.4, -0.9};
  m.b = 0.3;
  const LatentSpace space("z", 2, {1.0f, 2.0f, -1.0f, 0.5f});
  const std::vector<std::size_t> train = {0};
  const std::vector<std::size_t> test = {1};
  const RatioGradient g = kliep_gradient(m, space, train, test);
  const double sigma = 1.0 / (1.0 + std::exp(-0.3));
  const double r = std::log(std::exp(0.3) + 1.0);
  CHECK(g.b == doctest::Approx(sigma * (1.0 - 1.0 / r)).epsilon(1e-12));
  for (const double v : g.w) CHECK(v == 0.0);
  for (const double v : g.b1) CHECK(v == 0.0);
  for (const double v : g.w1) CHECK(v == 0.0);
  CHECK(code_of([&] { kliep_gradient(m, space, {}, test); }) == ErrorCode::kSplitEmpty);
}

TEST_CASE("training on identical splits settles near the r = 1 loss") {
  const auto base = shiftscope::testing::random_store(200, 0, 3, 9);
  std::vector<std::vector<float>> rows;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto row = base.space.row(i);
    rows.emplace_back(row.begin(), row.end());
  }
  for (std::size_t i = 0; i < 200; ++i) rows.push_back(rows[i]);
  const auto f = shiftscope::testing::fixture_from_rows(rows, 200);
  const AnalysisStore store = f.store();
  TrainConfig config;
  config.seed = 4;
  config.epochs = 100;
  const DreTrainResult result = train_dre(store, "z", config);
  REQUIRE(result.trained.history.size() == 100);
  CHECK(result.trained.history.back() >= 1.0);
  CHECK(std::abs(result.trained.history.back() - 1.0) < 0.05);
}

TEST_CASE("training orders shifted test points below unshifted ones") {
  const auto f = shiftscope::testing::gaussian_shift(1000, 900, 100);
  const AnalysisStore store = f.store();
  TrainConfig config;
  config.seed = 1;
  const DreTrainResult result = train_dre(store, "z", config);
  const auto ratios = ratios_for(result.trained.model, store.space("z"));
  double shifted = 0, plain = 0;
  for (const std::size_t i : store.test_indices()) {
    (f.shifted[i] ? shifted : plain) += ratios[i];
  }
  CHECK(shifted / 100.0 < plain / 900.0);
  CHECK(result.dre.name() == "dre");
  CHECK(result.dre.count() == store.size());
  CHECK(result.dre.dim() == 32);
}

TEST_CASE("training is deterministic per seed") {
  const auto f = shiftscope::testing::gaussian_shift(300, 250, 50);
  const AnalysisStore store = f.store();
  TrainConfig config;
  config.seed = 77;
  config.batch_size = 32;
  const auto a = train_dre(store, "z", config);
  const auto b = train_dre(store, "z", config);
  CHECK(a.trained.model.w1 == b.trained.model.w1);
  CHECK(a.trained.model.b1 == b.trained.model.b1);
  CHECK(a.trained.model.w == b.trained.model.w);
  CHECK(a.trained.model.b == b.trained.model.b);
  CHECK(a.trained.history == b.trained.history);
  config.seed = 78;
  const auto c = train_dre(store, "z", config);
  CHECK(c.trained.model.w1 != a.trained.model.w1);
}

TEST_CASE("training preconditions") {
  const auto f = shiftscope::testing::random_store(10, 0, 2, 1);
  const AnalysisStore store = f.store();
  CHECK(code_of([&] { train_dre(store, "z", {}); }) == ErrorCode::kSplitEmpty);
  CHECK(code_of([&] { train_dre(store, "nope", {}); }) == ErrorCode::kUnknownSpace);
  TrainConfig bad;
  bad.epochs = 0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::kInvalidArgument);
  bad = {};
  bad.learning_rate = 0.0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::kInvalidArgument);
  bad = {};
  bad.batch_size = 0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::kInvalidArgument);

  const auto g = shiftscope::testing::gaussian_shift(50, 40, 10);
  TrainConfig explode;
  explode.learning_rate = 1e200;
  CHECK(code_of([&] { train_dre(g.store(), "z", explode); }) == ErrorCode::kDivergedLoss);
}

TEST_CASE("property: ranking by ratio equals ranking by head") {
  std::mt19937_64 gen(8);
  std::normal_distribution<float> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const RatioModel m = random_model(3, 5, gen);
    std::vector<double> ratios, heads;
    for (int i = 0; i < 50; ++i) {
      const std::vector<float> z = {normal(gen), normal(gen), normal(gen)};
      const RatioOutput out = ratio_forward(m, std::span<const float>(z));
      ratios.push_back(out.ratio);
      heads.push_back(out.head);
    }
    std::vector<std::size_t> by_ratio(50), by_head(50);
    std::iota(by_ratio.begin(), by_ratio.end(), 0);
    std::iota(by_head.begin(), by_head.end(), 0);
    std::ranges::stable_sort(by_ratio, [&](auto a, auto b) { return ratios[a] < ratios[b]; });
    std::ranges::stable_sort(by_head, [&](auto a, auto b) { return heads[a] < heads[b]; });
    CHECK(by_ratio == by_head);
  }
}

TEST_CASE("dre latent rows are hidden activations") {
  const LatentSpace space("z", 3, {1, 2, 3, -1, 0, 4, 0.5f, 0.5f, -2});
  const LatentSpace zero = dre_latent(zero_ratio_model(3, 4), space);
  CHECK(zero.count() == 3);
  CHECK(std::ranges::all_of(zero.values(), [](float v) { return v == 0.0f; }));

  std::mt19937_64 gen(10);
  const RatioModel m = random_model(3, 4, gen);
  const LatentSpace d = dre_latent(m, space);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto row = space.row(i);
    std::vector<double> hidden;
    straight_line_ratio(m, std::vector<double>(row.begin(), row.end()), &hidden);
    for (std::size_t h = 0; h < 4; ++h) {
      CHECK(d.row(i)[h] == static_cast<float>(hidden[h]));
    }
    const RatioOutput fwd = ratio_forward(m, row);
    CHECK(d.row(i)[0] == static_cast<float>(fwd.hidden[0]));
  }
  CHECK(code_of([&] { dre_latent(random_model(2, 4, gen), space); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("model json reproduces forward outputs bit for bit") {
  const auto f = shiftscope::testing::gaussian_shift(100, 80, 20);
  TrainConfig config;
  config.seed = 3;
  config.epochs = 2;
  const auto result = train_dre(f.store(), "z", config);
  TempDir dir;
  save_model(dir / "model.json", result.trained);
  const TrainedRatioModel loaded = load_model(dir / "model.json");
  CHECK(loaded.model.w1 == result.trained.model.w1);
  CHECK(loaded.model.b == result.trained.model.b);
  CHECK(loaded.history == result.trained.history);
  CHECK(loaded.config.epochs == 2);
  for (std::size_t i = 0; i < f.space.count(); ++i) {
    const double a = ratio_forward(result.trained.model, f.space.row(i)).ratio;
    const double b = ratio_forward(loaded.model, f.space.row(i)).ratio;
    REQUIRE(std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b));
  }
  CHECK(code_of([&] { load_model(dir / "absent.json"); }) == ErrorCode::kMissingModel);
  CHECK(code_of([&] { model_from_json(R"({"input_dim":2})"); }) == ErrorCode::kParseError);
}
