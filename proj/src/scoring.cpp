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

#include "shiftscope/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csv.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/rng.hpp"

namespace shiftscope {
namespace {

constexpr double kEulerGamma = 0.5772156649;
constexpr std::string_view kScoresHeader = "id,split,method,space,raw,ratio,suspicion";

struct Builder {
  const LatentSpace& space;
  std::size_t height_limit;
  Rng& rng;
  IsolationForest::Tree tree;

  std::uint32_t build(std::span<std::size_t> rows, std::uint32_t depth) {
    const auto node_id = static_cast<std::uint32_t>(tree.size());
    tree.push_back({.size = static_cast<std::uint32_t>(rows.size()),
                    .depth = depth});
    if (rows.size() <= 1 || depth >= height_limit) return node_id;

    // Only dimensions with a non-zero range admit a split.
    std::vector<std::pair<std::size_t, std::pair<float, float>>> candidates;
    for (std::size_t k = 0; k < space.dim(); ++k) {
      float lo = space.row(rows[0])[k];
      float hi = lo;
      for (const std::size_t r : rows) {
        lo = std::min(lo, space.row(r)[k]);
        hi = std::max(hi, space.row(r)[k]);
      }
      if (hi > lo) candidates.push_back({k, {lo, hi}});
    }
    if (candidates.empty()) return node_id;

    const auto& [dim, range] = candidates[rng.below(candidates.size())];
    double value;
    do {
      value = rng.uniform(range.first, range.second);
    } while (value <= range.first);

    const auto mid = std::partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return static_cast<double>(space.row(r)[dim]) < value;
    });
    const auto split = static_cast<std::size_t>(mid - rows.begin());
    const std::uint32_t left = build(rows.first(split), depth + 1);
    const std::uint32_t right = build(rows.subspan(split), depth + 1);
    Node& node = tree[node_id];
    node.split_dim = static_cast<int>(dim);
    node.split_value = value;
    node.left = left;
    node.right = right;
    return node_id;
  }

  using Node = IsolationForest::Node;
};

std::vector<ScoreRow> rows_from_raw(std::span<const double> raw) {
  const std::vector<double> suspicion = normalize_scores(raw);
  std::vector<ScoreRow> rows(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    rows[i] = {.index = i, .raw = raw[i], .ratio = std::nullopt, .suspicion = suspicion[i]};
  }
  return rows;
}

}  // namespace

std::string_view method_name(ScoreMethod method) {
  switch (method) {
    case ScoreMethod::kDensityRatio: return "density_ratio";
    case ScoreMethod::kIsolationForest: return "isolation_forest";
    case ScoreMethod::kCenterDistance: return "center_distance";
  }
  return "unknown";
}

ScoreMethod parse_method(std::string_view name) {
  if (name == "density_ratio" || name == "density-ratio") {
    return ScoreMethod::kDensityRatio;
  }
  if (name == "isolation_forest" || name == "iforest") {
    return ScoreMethod::kIsolationForest;
  }
  if (name == "center_distance" || name == "center") {
    return ScoreMethod::kCenterDistance;
  }
  fail(ErrorCode::kInvalidArgument, "unknown scoring method '" +
                                        std::string(name) + "'");
}

ScoreTable::ScoreTable(ScoreMethod method, std::string space_name,
                       std::vector<ScoreRow> rows)
    : method_(method), space_name_(std::move(space_name)), rows_(std::move(rows)) {
  std::size_t max_index = 0;
  for (const auto& row : rows_) max_index = std::max(max_index, row.index);
  position_.assign(rows_.empty() ? 0 : max_index + 1, -1);
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    const ScoreRow& row = rows_[k];
    if (position_[row.index] != -1) {
      fail(ErrorCode::kDuplicateId, "instance " + std::to_string(row.index) +
                                        " scored twice");
    }
    if (!(row.suspicion >= 0.0 && row.suspicion <= 1.0)) {
      fail(ErrorCode::kOutOfRange, "suspicion outside [0, 1]");
    }
    position_[row.index] = static_cast<std::ptrdiff_t>(k);
  }
}

const ScoreRow* ScoreTable::find(std::size_t index) const {
  if (index >= position_.size() || position_[index] < 0) return nullptr;
  return &rows_[static_cast<std::size_t>(position_[index])];
}

double ScoreTable::suspicion(std::size_t index) const {
  const ScoreRow* row = find(index);
  if (row == nullptr) {
    fail(ErrorCode::kScoreCoverageGap,
         "no score for instance " + std::to_string(index));
  }
  return row->suspicion;
}

std::vector<double> normalize_scores(std::span<const double> raw) {
  if (raw.empty()) fail(ErrorCode::kInvalidArgument, "no scores to normalize");
  const auto [lo_it, hi_it] = std::ranges::minmax_element(raw);
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorCode::kNonFiniteValue, "scores must be finite");
  }
  std::vector<double> out(raw.size(), 0.0);
  if (hi == lo) return out;
  const double span = hi - lo;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = std::clamp((raw[i] - lo) / span, 0.0, 1.0);
  }
  return out;
}

ScoreTable suspicion_from_ratio(std::span<const double> ratios,
                                std::string space_name) {
  std::vector<double> raw(ratios.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0)) {
      fail(ErrorCode::kNonPositiveRatio,
           "ratio of instance " + std::to_string(i) + " is not positive");
    }
    raw[i] = -std::log(ratios[i] + kRatioEpsilon);
  }
  std::vector<ScoreRow> rows = rows_from_raw(raw);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].ratio = ratios[i];
  return ScoreTable(ScoreMethod::kDensityRatio, std::move(space_name),
                    std::move(rows));
}

ScoreTable table_from_raw(ScoreMethod method, std::string space_name,
                          std::span<const double> raw) {
  return ScoreTable(method, std::move(space_name), rows_from_raw(raw));
}

std::size_t IsolationForest::height_limit() const {
  return sample_size_ <= 1
             ? 0
             : static_cast<std::size_t>(
                   std::ceil(std::log2(static_cast<double>(sample_size_))));
}

double IsolationForest::expected_path_length(std::span<const float> point) const {
  if (point.size() != dim_) {
    fail(ErrorCode::kDimensionMismatch, "point dim does not match forest");
  }
  double total = 0.0;
  for (const Tree& tree : trees_) {
    const Node* node = &tree.front();
    while (node->split_dim >= 0) {
      const double x = point[static_cast<std::size_t>(node->split_dim)];
      node = &tree[x < node->split_value ? node->left : node->right];
    }
    total += node->depth + average_path_length(node->size);
  }
  return total / static_cast<double>(trees_.size());
}

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n - 1);
  return 2.0 * (std::log(m) + kEulerGamma) - 2.0 * m / static_cast<double>(n);
}

double anomaly_score_from_path(double mean_path, std::size_t sample_size) {
  const double c = average_path_length(sample_size);
  if (c <= 0.0) return 0.5;
  return std::exp2(-mean_path / c);
}

IsolationForest fit_isolation_forest(const LatentSpace& space,
                                     std::span<const std::size_t> rows,
                                     const IsolationForestParams& params) {
  if (rows.size() < 2) {
    fail(ErrorCode::kTooFewPoints, "isolation forest needs at least 2 points");
  }
  if (params.n_trees < 1 || params.subsample < 2) {
    fail(ErrorCode::kInvalidArgument, "need n_trees >= 1 and subsample >= 2");
  }
  const std::size_t sample_size = std::min(params.subsample, rows.size());
  const auto height_limit = static_cast<std::size_t>(
      std::ceil(std::log2(static_cast<double>(sample_size))));
  Rng rng(params.seed);
  std::vector<std::size_t> pool(rows.begin(), rows.end());
  std::vector<IsolationForest::Tree> trees;
  trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    // Partial Fisher-Yates: the first sample_size entries are the subsample.
    for (std::size_t i = 0; i < sample_size; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    }
    std::vector<std::size_t> sample(pool.begin(), pool.begin() + sample_size);
    Builder builder{space, height_limit, rng, {}};
    builder.build(sample, 0);
    trees.push_back(std::move(builder.tree));
  }
  return IsolationForest(space.dim(), sample_size, std::move(trees));
}

double iforest_score(const IsolationForest& forest,
                     std::span<const float> point) {
  return anomaly_score_from_path(forest.expected_path_length(point),
                                 forest.sample_size());
}

std::vector<double> centroid(const LatentSpace& space,
                             std::span<const std::size_t> rows) {
  if (rows.empty()) fail(ErrorCode::kTooFewPoints, "centroid of no points");
  std::vector<double> mean(space.dim(), 0.0);
  for (const std::size_t r : rows) {
    const auto row = space.row(r);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += row[k];
  }
  for (double& v : mean) v /= static_cast<double>(rows.size());
  return mean;
}

double center_distance_score(const LatentSpace& space,
                             std::span<const std::size_t> rows,
                             std::span<const float> point) {
  if (point.size() != space.dim()) {
    fail(ErrorCode::kDimensionMismatch, "point dim does not match space");
  }
  const std::vector<double> mean = centroid(space, rows);
  double sum = 0.0;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double diff = static_cast<double>(point[k]) - mean[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

ScoreTable score_dataset(const AnalysisStore& store, ScoreMethod method,
                         const std::string& space_name,
                         const ScoringInputs& inputs) {
  const LatentSpace& space = store.space(space_name);
  store.require_both_splits();
  const std::size_t n = store.size();
  switch (method) {
    case ScoreMethod::kDensityRatio: {
      if (inputs.model == nullptr) {
        fail(ErrorCode::kMissingModel, "density-ratio scoring needs a trained model");
      }
      return suspicion_from_ratio(ratios_for(*inputs.model, space), space_name);
    }
    case ScoreMethod::kIsolationForest: {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), std::size_t{0});
      const IsolationForest forest = fit_isolation_forest(space, all, inputs.forest);
      std::vector<double> raw(n);
      for (std::size_t i = 0; i < n; ++i) raw[i] = iforest_score(forest, space.row(i));
      return table_from_raw(method, space_name, raw);
    }
    case ScoreMethod::kCenterDistance: {
      const std::vector<double> mean = centroid(space, store.train_indices());
      std::vector<double> raw(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = space.row(i);
        double sum = 0.0;
        for (std::size_t k = 0; k < mean.size(); ++k) {
          const double diff = static_cast<double>(row[k]) - mean[k];
          sum += diff * diff;
        }
        raw[i] = std::sqrt(sum);
      }
      return table_from_raw(method, space_name, raw);
    }
  }
  fail(ErrorCode::kInternal, "unhandled scoring method");
}

void save_scores(const std::filesystem::path& path, const AnalysisStore& store,
                 const ScoreTable& table) {
  std::string out(kScoresHeader);
  out += '\n';
  const std::string method(method_name(table.method()));
  for (const ScoreRow& row : table.rows()) {
    const InstanceRecord& record = store.record(row.index);
    out += csv::quote(record.id);
    out += ',';
    out += split_name(record.split);
    out += ',' + method + ',' + csv::quote(table.space_name()) + ',';
    out += csv::number(row.raw);
    out += ',';
    if (row.ratio) out += csv::number(*row.ratio);
    out += ',';
    out += csv::number(row.suspicion);
    out += '\n';
  }
  csv::write_file(path, out);
}

ScoreTable load_scores(const std::filesystem::path& path,
                       const AnalysisStore& store) {
  const auto table =
      csv::read_table(path, kScoresHeader, ErrorCode::kMissingArtifact);
  if (table.empty()) fail(ErrorCode::kParseError, path.string() + " has no rows");
  const ScoreMethod method = parse_method(table.front()[2]);
  const std::string space = table.front()[3];
  std::vector<ScoreRow> rows;
  rows.reserve(table.size());
  const std::string where = path.string();
  for (const auto& f : table) {
    const std::size_t index = store.index_of(f[0]);
    if (parse_split(f[1]) != store.record(index).split) {
      fail(ErrorCode::kParseError, where + ": split of '" + f[0] + "' differs");
    }
    if (parse_method(f[2]) != method || f[3] != space) {
      fail(ErrorCode::kParseError, where + ": mixed methods or spaces");
    }
    ScoreRow row{.index = index,
                 .raw = csv::parse_number(f[4], where),
                 .ratio = std::nullopt,
                 .suspicion = csv::parse_number(f[6], where)};
    if (!f[5].empty()) row.ratio = csv::parse_number(f[5], where);
    rows.push_back(row);
  }
  return ScoreTable(method, space, std::move(rows));
}

}  // namespace shiftscope
