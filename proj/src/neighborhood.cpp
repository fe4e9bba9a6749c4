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

#include "shiftscope/neighborhood.hpp"

#include <algorithm>
#include <cmath>

#include "shiftscope/error.hpp"

namespace shiftscope {
namespace {

template <typename A, typename B>
double distance_impl(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::kDimensionMismatch,
         "distance between dims " + std::to_string(a.size()) + " and " +
             std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

bool closer(const Neighbor& x, const Neighbor& y) {
  return x.distance < y.distance ||
         (x.distance == y.distance && x.index < y.index);
}

// All candidates sorted; keeps only the first k.
std::vector<Neighbor> take_nearest(std::vector<Neighbor> candidates,
                                   std::size_t k) {
  if (k < candidates.size()) {
    std::partial_sort(candidates.begin(), candidates.begin() + k,
                      candidates.end(), closer);
    candidates.resize(k);
  } else {
    std::sort(candidates.begin(), candidates.end(), closer);
  }
  return candidates;
}

std::vector<Neighbor> distances_from(const LatentSpace& space,
                                     std::span<const std::size_t> pool,
                                     std::size_t focus) {
  std::vector<Neighbor> out;
  out.reserve(pool.size());
  const auto query = space.row(focus);
  for (const std::size_t i : pool) {
    if (i == focus) continue;
    out.push_back({i, distance_impl(query, space.row(i))});
  }
  return out;
}

}  // namespace

double pairwise_distance(std::span<const float> a, std::span<const float> b) {
  return distance_impl(a, b);
}

double pairwise_distance(std::span<const float> a, std::span<const double> b) {
  return distance_impl(a, b);
}

std::vector<Neighbor> knn(const AnalysisStore& store,
                          const std::string& space_name,
                          std::optional<Split> split, std::size_t query_index,
                          std::size_t k) {
  const LatentSpace& space = store.space(space_name);
  if (query_index >= store.size()) {
    fail(ErrorCode::kUnknownInstance,
         "no instance at index " + std::to_string(query_index));
  }
  if (k < 1) fail(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::vector<std::size_t> all;
  std::span<const std::size_t> pool;
  if (split) {
    pool = store.indices_of(*split);
  } else {
    all.resize(store.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    pool = all;
  }
  return take_nearest(distances_from(space, pool, query_index), k);
}

std::vector<Neighbor> nearest_to_point(const AnalysisStore& store,
                                       const LatentSpace& space, Split split,
                                       std::span<const double> point,
                                       std::size_t k) {
  std::vector<Neighbor> candidates;
  const auto& pool = store.indices_of(split);
  candidates.reserve(pool.size());
  for (const std::size_t i : pool) {
    candidates.push_back({i, distance_impl(space.row(i), point)});
  }
  return take_nearest(std::move(candidates), k);
}

Neighborhood adaptive_neighborhood(const AnalysisStore& store,
                                   const std::string& space_name,
                                   std::size_t focus_index,
                                   const NeighborhoodOptions& options) {
  const LatentSpace& space = store.space(space_name);
  if (focus_index >= store.size()) {
    fail(ErrorCode::kUnknownInstance,
         "no instance at index " + std::to_string(focus_index));
  }
  std::vector<Neighbor> test = take_nearest(
      distances_from(space, store.test_indices(), focus_index),
      store.test_indices().size());
  std::vector<Neighbor> train = take_nearest(
      distances_from(space, store.train_indices(), focus_index),
      store.train_indices().size());

  Neighborhood out;
  out.focus_index = focus_index;
  out.space_name = space_name;
  const auto radius_at = [&](std::size_t count) {
    if (test.empty() || count == 0) return 0.0;
    return test[std::min(count, test.size()) - 1].distance;
  };
  out.radius = radius_at(options.target_test_count);
  const auto within = [&](const std::vector<Neighbor>& sorted) {
    return static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), out.radius,
                         [](double r, const Neighbor& n) { return r < n.distance; }) -
        sorted.begin());
  };
  if (within(test) < options.min_count) {
    out.radius = std::max(out.radius, radius_at(options.min_count));
  }
  const std::size_t n_test = within(test);
  const std::size_t n_train = within(train);
  for (std::size_t k = 0; k < n_test; ++k) out.test_members.push_back(test[k].index);
  for (std::size_t k = 0; k < n_train; ++k) out.train_members.push_back(train[k].index);
  return out;
}

}  // namespace shiftscope
