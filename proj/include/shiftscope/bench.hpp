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

#ifndef SHIFTSCOPE_BENCH_HPP_
#define SHIFTSCOPE_BENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shiftscope/core_data.hpp"
#include "shiftscope/kliep.hpp"
#include "shiftscope/scoring.hpp"

namespace shiftscope {

enum class Polarity { kPresent, kAbsent };

std::string_view polarity_name(Polarity polarity);

// Train keeps only instances whose attribute matches the polarity; the test
// split is used unfiltered and its instances that do not match are the
// shifted positives.
struct ShiftExperiment {
  std::string attribute;
  Polarity polarity = Polarity::kPresent;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<int> ground_truth;  // parallel to test_indices
};

// One experiment per (attribute, polarity), attributes in name order and
// "present" before "absent". Degenerate experiments are skipped.
std::vector<ShiftExperiment> generate_experiments(const AnalysisStore& store);

// Probability that a random positive outscores a random negative, ties
// counted half (normalized Mann-Whitney U with mid-ranks).
double auroc(std::span<const double> scores, std::span<const int> labels);

struct BenchRow {
  ScoreMethod method = ScoreMethod::kDensityRatio;
  std::string space;
  std::string attribute;
  Polarity polarity = Polarity::kPresent;
  double auroc = 0.0;
};

struct BenchMean {
  ScoreMethod method = ScoreMethod::kDensityRatio;
  double mean_auroc = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // method-major, then space, then experiment
  std::vector<BenchMean> means;

  double mean_for(ScoreMethod method) const;
};

struct BenchOptions {
  TrainConfig train;
  IsolationForestParams forest;
  std::uint64_t seed = 0;  // experiment e uses seed + e
};

// Test-split outlier scores for one experiment; higher means more shifted.
std::vector<double> experiment_scores(const LatentSpace& space,
                                      const ShiftExperiment& experiment,
                                      ScoreMethod method, std::uint64_t seed,
                                      const BenchOptions& options);

BenchReport run_benchmark(const AnalysisStore& store,
                          std::span<const ScoreMethod> methods,
                          std::span<const std::string> spaces,
                          const BenchOptions& options);

std::string bench_to_csv(const BenchReport& report);
void save_bench(const std::filesystem::path& path, const BenchReport& report);

}  // namespace shiftscope

#endif  // SHIFTSCOPE_BENCH_HPP_
