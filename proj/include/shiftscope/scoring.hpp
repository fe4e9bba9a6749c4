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

#ifndef SHIFTSCOPE_SCORING_HPP_
#define SHIFTSCOPE_SCORING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shiftscope/core_data.hpp"
#include "shiftscope/kliep.hpp"

namespace shiftscope {

enum class ScoreMethod { kDensityRatio, kIsolationForest, kCenterDistance };

// Canonical names: density_ratio, isolation_forest, center_distance.
std::string_view method_name(ScoreMethod method);
// Also accepts the short CLI spellings density-ratio, iforest and center.
ScoreMethod parse_method(std::string_view name);

struct ScoreRow {
  std::size_t index = 0;
  double raw = 0.0;
  std::optional<double> ratio;
  double suspicion = 0.0;
};

// Per-instance scores; higher suspicion means more likely shifted.
class ScoreTable {
 public:
  ScoreTable() = default;
  ScoreTable(ScoreMethod method, std::string space_name,
             std::vector<ScoreRow> rows);

  ScoreMethod method() const { return method_; }
  const std::string& space_name() const { return space_name_; }
  std::span<const ScoreRow> rows() const { return rows_; }

  const ScoreRow* find(std::size_t index) const;
  bool covers(std::size_t index) const { return find(index) != nullptr; }
  // Throws ScoreCoverageGap.
  double suspicion(std::size_t index) const;

 private:
  ScoreMethod method_ = ScoreMethod::kDensityRatio;
  std::string space_name_;
  std::vector<ScoreRow> rows_;
  std::vector<std::ptrdiff_t> position_;  // instance index -> row, -1 if absent
};

// Min-max to [0, 1]; a constant input maps to all zeros.
std::vector<double> normalize_scores(std::span<const double> raw);

inline constexpr double kRatioEpsilon = 1e-12;

// raw = -ln(r + eps), normalized over every given ratio. Row i is instance i.
ScoreTable suspicion_from_ratio(std::span<const double> ratios,
                                std::string space_name = {});

// Builds a table for instances 0..n-1 from raw scores.
ScoreTable table_from_raw(ScoreMethod method, std::string space_name,
                          std::span<const double> raw);

// Random axis-aligned isolation trees over a fixed-size subsample.
class IsolationForest {
 public:
  struct Node {
    int split_dim = -1;  // -1 marks a leaf
    double split_value = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t size = 0;
    std::uint32_t depth = 0;
  };
  using Tree = std::vector<Node>;

  IsolationForest(std::size_t dim, std::size_t sample_size,
                  std::vector<Tree> trees)
      : dim_(dim), sample_size_(sample_size), trees_(std::move(trees)) {}

  std::size_t dim() const { return dim_; }
  std::size_t sample_size() const { return sample_size_; }
  std::size_t height_limit() const;
  std::span<const Tree> trees() const { return trees_; }

  // Mean over trees of leaf depth plus c(leaf size).
  double expected_path_length(std::span<const float> point) const;

 private:
  std::size_t dim_;
  std::size_t sample_size_;
  std::vector<Tree> trees_;
};

struct IsolationForestParams {
  std::size_t n_trees = 100;
  std::size_t subsample = 256;
  std::uint64_t seed = 0;
};

// Average unsuccessful-search path length of a binary search tree with n
// nodes: 2H(n-1) - 2(n-1)/n, with c(2) = 1 and c(n <= 1) = 0.
double average_path_length(std::size_t n);

// 2^(-mean_path / c(sample_size)).
double anomaly_score_from_path(double mean_path, std::size_t sample_size);

IsolationForest fit_isolation_forest(const LatentSpace& space,
                                     std::span<const std::size_t> rows,
                                     const IsolationForestParams& params);

// In (0, 1]; higher is more anomalous.
double iforest_score(const IsolationForest& forest,
                     std::span<const float> point);

std::vector<double> centroid(const LatentSpace& space,
                             std::span<const std::size_t> rows);

// Euclidean distance from `point` to the mean of the selected rows.
double center_distance_score(const LatentSpace& space,
                             std::span<const std::size_t> rows,
                             std::span<const float> point);

struct ScoringInputs {
  const RatioModel* model = nullptr;
  IsolationForestParams forest;
};

// One row per instance of both splits. Density ratio applies the model to
// `space_name`; isolation forest is fit on every instance; center distance is
// measured from the train mean.
ScoreTable score_dataset(const AnalysisStore& store, ScoreMethod method,
                         const std::string& space_name,
                         const ScoringInputs& inputs);

void save_scores(const std::filesystem::path& path, const AnalysisStore& store,
                 const ScoreTable& table);
ScoreTable load_scores(const std::filesystem::path& path,
                       const AnalysisStore& store);

}  // namespace shiftscope

#endif  // SHIFTSCOPE_SCORING_HPP_
