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

#ifndef SHIFTSCOPE_NEIGHBORHOOD_HPP_
#define SHIFTSCOPE_NEIGHBORHOOD_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shiftscope/core_data.hpp"

namespace shiftscope {

// Euclidean norm of a - b.
double pairwise_distance(std::span<const float> a, std::span<const float> b);
double pairwise_distance(std::span<const float> a, std::span<const double> b);

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

// Exact k nearest instances of `split` (all instances when unset) to the
// query row, ascending by distance with ties broken by lower index. The query
// itself is skipped. Returns the whole split when it has fewer than k members.
std::vector<Neighbor> knn(const AnalysisStore& store,
                          const std::string& space_name,
                          std::optional<Split> split, std::size_t query_index,
                          std::size_t k);

// Every instance of `split` sorted by distance to an arbitrary point.
std::vector<Neighbor> nearest_to_point(const AnalysisStore& store,
                                       const LatentSpace& space, Split split,
                                       std::span<const double> point,
                                       std::size_t k);

struct Neighborhood {
  std::size_t focus_index = 0;
  std::string space_name;
  double radius = 0.0;
  std::vector<std::size_t> train_members;  // ascending distance
  std::vector<std::size_t> test_members;   // ascending distance
};

struct NeighborhoodOptions {
  std::size_t target_test_count = 100;
  std::size_t min_count = 10;
};

// Radius reaches the target-th nearest test instance (farthest if fewer
// exist), expanded to the min_count-th when the target yields fewer members.
// Members are all instances of either split within the radius; the focus
// is never a member.
Neighborhood adaptive_neighborhood(const AnalysisStore& store,
                                   const std::string& space_name,
                                   std::size_t focus_index,
                                   const NeighborhoodOptions& options = {});

}  // namespace shiftscope

#endif  // SHIFTSCOPE_NEIGHBORHOOD_HPP_
