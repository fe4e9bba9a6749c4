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

#include "shiftscope/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csv.hpp"
#include "shiftscope/error.hpp"

namespace shiftscope {

std::string_view polarity_name(Polarity polarity) {
  return polarity == Polarity::kPresent ? "present" : "absent";
}

std::vector<ShiftExperiment> generate_experiments(const AnalysisStore& store) {
  if (!store.has_attributes()) {
    fail(ErrorCode::kNoAttributes, "the manifest carries no attribute labels");
  }
  std::vector<ShiftExperiment> out;
  for (const auto& [attribute, unused] : store.record(0).attributes) {
    for (const Polarity polarity : {Polarity::kPresent, Polarity::kAbsent}) {
      const int wanted = polarity == Polarity::kPresent ? 1 : 0;
      ShiftExperiment e;
      e.attribute = attribute;
      e.polarity = polarity;
      for (const std::size_t i : store.train_indices()) {
        if (store.record(i).attributes.at(attribute) == wanted) {
          e.train_indices.push_back(i);
        }
      }
      e.test_indices = store.test_indices();
      std::size_t positives = 0;
      for (const std::size_t i : e.test_indices) {
        const int shifted = store.record(i).attributes.at(attribute) != wanted;
        e.ground_truth.push_back(shifted);
        positives += static_cast<std::size_t>(shifted);
      }
      if (e.train_indices.empty() || positives == 0 ||
          positives == e.test_indices.size()) {
        continue;
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorCode::kInvalidArgument, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    // Mid-rank of the tie group, 1-based.
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += rank;
        ++positives;
      }
    }
    start = end;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    fail(ErrorCode::kSingleClass, "AUROC needs both classes");
  }
  const auto p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double BenchReport::mean_for(ScoreMethod method) const {
  for (const BenchMean& m : means) {
    if (m.method == method) return m.mean_auroc;
  }
  fail(ErrorCode::kInvalidArgument, "method not in report");
}

std::vector<double> experiment_scores(const LatentSpace& space,
                                      const ShiftExperiment& experiment,
                                      ScoreMethod method, std::uint64_t seed,
                                      const BenchOptions& options) {
  const auto& test = experiment.test_indices;
  std::vector<double> scores;
  scores.reserve(test.size());
  switch (method) {
    case ScoreMethod::kDensityRatio: {
      TrainConfig config = options.train;
      config.seed = seed;
      const TrainedRatioModel trained =
          fit_ratio_model(space, experiment.train_indices, test, config);
      for (const std::size_t i : test) {
        const double r = ratio_forward(trained.model, space.row(i)).ratio;
        scores.push_back(-std::log(r + kRatioEpsilon));
      }
      break;
    }
    case ScoreMethod::kIsolationForest: {
      std::vector<std::size_t> pool = experiment.train_indices;
      pool.insert(pool.end(), test.begin(), test.end());
      IsolationForestParams params = options.forest;
      params.seed = seed;
      const IsolationForest forest = fit_isolation_forest(space, pool, params);
      for (const std::size_t i : test) scores.push_back(iforest_score(forest, space.row(i)));
      break;
    }
    case ScoreMethod::kCenterDistance: {
      for (const std::size_t i : test) {
        scores.push_back(
            center_distance_score(space, experiment.train_indices, space.row(i)));
      }
      break;
    }
  }
  return scores;
}

BenchReport run_benchmark(const AnalysisStore& store,
                          std::span<const ScoreMethod> methods,
                          std::span<const std::string> spaces,
                          const BenchOptions& options) {
  options.train.validate();
  if (methods.empty() || spaces.empty()) {
    fail(ErrorCode::kInvalidArgument, "benchmark needs methods and spaces");
  }
  const std::vector<ShiftExperiment> experiments = generate_experiments(store);
  BenchReport report;
  for (const ScoreMethod method : methods) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const std::string& space_name : spaces) {
      const LatentSpace& space = store.space(space_name);
      for (std::size_t e = 0; e < experiments.size(); ++e) {
        const ShiftExperiment& experiment = experiments[e];
        const std::vector<double> scores =
            experiment_scores(space, experiment, method, options.seed + e, options);
        const double value = auroc(scores, experiment.ground_truth);
        report.rows.push_back({method, space_name, experiment.attribute,
                               experiment.polarity, value});
        sum += value;
        ++count;
      }
    }
    report.means.push_back(
        {method, count == 0 ? 0.0 : sum / static_cast<double>(count)});
  }
  return report;
}

std::string bench_to_csv(const BenchReport& report) {
  std::string out = "method,space,attribute,polarity,auroc\n";
  for (const BenchRow& row : report.rows) {
    out += std::string(method_name(row.method)) + ',' + csv::quote(row.space) +
           ',' + csv::quote(row.attribute) + ',' +
           std::string(polarity_name(row.polarity)) + ',' +
           csv::number(row.auroc) + '\n';
  }
  for (const BenchMean& mean : report.means) {
    out += std::string(method_name(mean.method)) + ",,MEAN,," +
           csv::number(mean.mean_auroc) + '\n';
  }
  return out;
}

void save_bench(const std::filesystem::path& path, const BenchReport& report) {
  csv::write_file(path, bench_to_csv(report));
}

}  // namespace shiftscope
