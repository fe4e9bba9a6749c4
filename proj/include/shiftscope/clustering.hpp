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

#ifndef SHIFTSCOPE_CLUSTERING_HPP_
#define SHIFTSCOPE_CLUSTERING_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shiftscope/core_data.hpp"
#include "shiftscope/scoring.hpp"

namespace shiftscope {

// Agglomerative Ward clustering of the selected rows. Clusters are identified
// by their smallest row position; each step merges the pair with the least
// increase in within-cluster sum of squares, ties going to the
// lexicographically smallest (id, id) pair. Returns one label per row,
// numbered 0..n_clusters-1 in order of each cluster's first row.
std::vector<std::size_t> ward_labels(const LatentSpace& space,
                                     std::span<const std::size_t> rows,
                                     std::size_t n_clusters);

struct ClusterAssignment {
  std::string space_name;
  std::size_t n_clusters = 0;
  std::vector<std::size_t> members_order;  // test instance indices
  std::vector<std::size_t> labels;         // parallel to members_order
  std::vector<std::vector<double>> centroids;
  std::vector<std::vector<std::size_t>> members;  // per cluster, ascending

  std::size_t cluster_count() const { return centroids.size(); }
};

// Clusters the test split of `space_name`.
ClusterAssignment ward_cluster(const AnalysisStore& store,
                               const std::string& space_name,
                               std::size_t n_clusters = 100);

// Fills centroids and member lists from labels.
ClusterAssignment make_assignment(const AnalysisStore& store,
                                  const std::string& space_name,
                                  std::vector<std::size_t> members_order,
                                  std::vector<std::size_t> labels);

struct ClusterSummary {
  std::size_t cluster_id = 0;
  std::size_t size = 0;
  double mean_suspicion = 0.0;
  std::vector<std::size_t> representatives;  // descending suspicion
};

inline constexpr std::size_t kRepresentativeCount = 9;

// Clusters by descending mean suspicion (ties: ascending id), first top_k.
std::vector<ClusterSummary> rank_clusters(const ClusterAssignment& assignment,
                                          const ScoreTable& scores,
                                          std::size_t top_k = 10);

struct ContrastSet {
  std::vector<std::size_t> test;   // descending suspicion
  std::vector<std::size_t> train;  // descending suspicion, same size as test
};

// Up to `cap` most suspicious members, matched with as many train instances
// nearest the cluster centroid.
ContrastSet cluster_contrast_set(const AnalysisStore& store,
                                 const ClusterAssignment& assignment,
                                 std::size_t cluster_id,
                                 const ScoreTable& scores,
                                 std::size_t cap = 50);

// Orders indices by descending suspicion, ties by ascending index.
void sort_by_suspicion(std::vector<std::size_t>& indices,
                       const ScoreTable& scores);

void save_clusters(const std::filesystem::path& path,
                   const AnalysisStore& store,
                   const ClusterAssignment& assignment);
ClusterAssignment load_clusters(const std::filesystem::path& path,
                                const AnalysisStore& store,
                                const std::string& space_name);

}  // namespace shiftscope

#endif  // SHIFTSCOPE_CLUSTERING_HPP_
