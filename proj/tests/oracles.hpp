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

// Independent reference computations. None of these call into the engine
// code paths they are used to check.

#ifndef SHIFTSCOPE_TESTS_ORACLES_HPP_
#define SHIFTSCOPE_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <vector>

namespace shiftscope::oracle {

// Pairs (positive, negative) with the positive scoring higher, ties half.
inline double pair_count_auroc(std::span<const double> scores,
                               std::span<const int> labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

inline double sum_of_squares(const std::vector<std::vector<double>>& points,
                             const std::vector<std::size_t>& members) {
  std::vector<double> mean(points.front().size(), 0.0);
  for (const std::size_t m : members) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += points[m][k];
  }
  for (double& v : mean) v /= static_cast<double>(members.size());
  double sse = 0.0;
  for (const std::size_t m : members) {
    for (std::size_t k = 0; k < mean.size(); ++k) {
      sse += (points[m][k] - mean[k]) * (points[m][k] - mean[k]);
    }
  }
  return sse;
}

// Greedy agglomeration that re-evaluates the Ward criterion (growth of the
// within-cluster sum of squares) from raw member sets for every candidate
// pair at every step. Clusters are keyed by their smallest member; ties go to
// the lexicographically smallest key pair. Labels number clusters by first
// member.
inline std::vector<std::size_t> exhaustive_ward(
    const std::vector<std::vector<double>>& points, std::size_t n_clusters) {
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < points.size(); ++i) clusters[i] = {i};
  while (clusters.size() > n_clusters) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0;
    std::size_t best_b = 0;
    for (auto a = clusters.begin(); a != clusters.end(); ++a) {
      for (auto b = std::next(a); b != clusters.end(); ++b) {
        std::vector<std::size_t> merged = a->second;
        merged.insert(merged.end(), b->second.begin(), b->second.end());
        const double growth = sum_of_squares(points, merged) -
                              sum_of_squares(points, a->second) -
                              sum_of_squares(points, b->second);
        if (growth < best) {
          best = growth;
          best_a = a->first;
          best_b = b->first;
        }
      }
    }
    auto& into = clusters[best_a];
    into.insert(into.end(), clusters[best_b].begin(), clusters[best_b].end());
    clusters.erase(best_b);
  }
  std::vector<std::size_t> labels(points.size());
  std::size_t label = 0;
  for (const auto& [key, members] : clusters) {
    for (const std::size_t m : members) labels[m] = label;
    ++label;
  }
  return labels;
}

// True when two labelings induce the same partition.
inline bool same_partition(const std::vector<std::size_t>& a,
                           const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::size_t, std::size_t> forward;
  std::map<std::size_t, std::size_t> backward;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto [f, fi] = forward.emplace(a[i], b[i]);
    const auto [g, gi] = backward.emplace(b[i], a[i]);
    if (f->second != b[i] || g->second != a[i]) return false;
  }
  return true;
}

// Ratio p_train / p_test for train N(0, I_2) against the test mixture
// (1 - w) N(0, I_2) + w N(mu, I_2) with mu = (offset, offset).
inline double gaussian_mixture_ratio(double x, double y, double offset, double w) {
  const double log_bump = offset * (x + y) - offset * offset;  // mu.x - |mu|^2/2
  return 1.0 / ((1.0 - w) + w * std::exp(log_bump));
}

}  // namespace shiftscope::oracle

#endif  // SHIFTSCOPE_TESTS_ORACLES_HPP_
