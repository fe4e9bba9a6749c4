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

#ifndef SHIFTSCOPE_PROJECTION_HPP_
#define SHIFTSCOPE_PROJECTION_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shiftscope/core_data.hpp"

namespace shiftscope {

enum class ProjectionMethod { kPca, kExternal };

// Linear 2D projector: coordinates are (x - mean) . component_k.
struct Projector2D {
  ProjectionMethod method = ProjectionMethod::kPca;
  std::vector<double> mean;
  std::array<std::vector<double>, 2> components;
  std::array<double, 2> explained_variance{};  // population variance
};

struct PcaOptions {
  double tolerance = 1e-10;
  int max_iterations = 1000;
};

// Top two principal components by power iteration with deflation. Each
// component's largest-magnitude coordinate is made positive.
Projector2D fit_pca2(const LatentSpace& space,
                     std::span<const std::size_t> rows,
                     const PcaOptions& options = {});

std::array<double, 2> project2(const Projector2D& projector,
                               std::span<const float> point);

struct ProjectedPoint {
  std::size_t index = 0;
  double x = 0.0;
  double y = 0.0;
};

using ProjectionTable = std::vector<ProjectedPoint>;

// Fits PCA on the test split of `space_name` and projects it.
ProjectionTable project_test_split(const AnalysisStore& store,
                                   const std::string& space_name);

void save_projection(const std::filesystem::path& path,
                     const AnalysisStore& store, const ProjectionTable& table);

// Reads `id,x,y` rows; the rows must cover exactly the test split. The result
// is in test-split order.
ProjectionTable load_external_projection(const std::filesystem::path& path,
                                         const AnalysisStore& store);

}  // namespace shiftscope

#endif  // SHIFTSCOPE_PROJECTION_HPP_
